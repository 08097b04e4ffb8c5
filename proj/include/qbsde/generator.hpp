#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qbsde/expr.hpp"
#include "qbsde/structural.hpp"

namespace qbsde {

// Builtin component families. Each reproduces a closed form; anything richer
// is written as an expression.
struct ZeroComponent {};
struct DiagQuadComponent { // sign * (gamma/2) |z^i|^2
    double gamma = 1.0;
    int sign = +1;
};
struct LinearYComponent { // coef * y^i
    double coef = 0.0;
};
struct LinearZComponent { // mu . z^i + c
    std::vector<double> mu;
    double c = 0.0;
};

using ComponentDef =
    std::variant<ZeroComponent, DiagQuadComponent, LinearYComponent, LinearZComponent, Expr>;

enum class ConvexityTag { None, Convex, Concave };

// Terminal condition xi = h(B_T), one expression per component.
struct TerminalCondition {
    std::vector<Expr> h;
    bool bounded = false; // asserts sup|h| <= C1 on a wide grid

    void evaluate(std::span<const double> b, std::span<double> out) const;
};

// A generator g(t, y, z) in R^n: structural constants, component
// definitions, the alpha budget process a(t, b), and structural metadata.
// Immutable after construction; evaluation is pure.
class GeneratorModel {
public:
    StructuralConstants constants;
    std::vector<ComponentDef> components;
    std::optional<Expr> alpha; // empty means alpha = 0
    std::vector<bool> diagonal;
    std::vector<ConvexityTag> convexity;

    // Shape invariants (component count = n, flag lengths).
    void validate_shape() const;

    double component(std::size_t i, double t, std::span<const double> y,
                     std::span<const double> z) const;
    void evaluate(double t, std::span<const double> y, std::span<const double> z,
                  std::span<double> out) const;
    double alpha_value(double t, std::span<const double> b) const;

    bool all_diagonal() const;
};

// H(z; i): the matrix equal to z except row i replaced by `row`.
void substitute_row(std::span<const double> z, std::size_t i, std::span<const double> row,
                    std::span<double> out, std::size_t n, std::size_t d);
std::vector<double> substitute_row(std::span<const double> z, std::size_t i,
                                   std::span<const double> row, std::size_t n,
                                   std::size_t d);

enum class Assumption { H1, H2, H4, H5, B1, B2, B3 };
std::string assumption_name(Assumption a);

struct ComponentFinding {
    // H5: +1 when the strict lower variant holds on every sample, -1 for the
    // upper variant, 0 when neither does. B3: the midpoint tag that held.
    int h5_variant = 0;
    ConvexityTag midpoint_tag = ConvexityTag::None;
    std::size_t violations = 0;
};

struct ValidationReport {
    Assumption which = Assumption::H1;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0; // most negative slack rhs - lhs over samples
    std::vector<ComponentFinding> per_component;
    // H2 only: smallest scalar multiplier on the right side that would make
    // every sampled pair pass (inf when a pair has rhs = 0 < lhs).
    double h2_multiplier = 0.0;
    std::uint64_t seed = 0;
    double box_ry = 0.0;
    double box_rz = 0.0;

    bool passed() const { return violations == 0; }
};

struct ValidatorOptions {
    double r_y = 10.0;
    double r_z = 10.0;
    std::size_t alpha_probes = 64; // b draws for maximizing a(t, b)
    double tolerance = 1e-9;
};

// Sampled validators for the structural assumptions: quasi-random points in
// [0,T] x [-R_y,R_y]^n x [-R_z,R_z]^{n x d} (pairs where the assumption
// compares two points), with alpha replaced by a(t, b) maximized over sampled
// b. Violations are data, not errors.
ValidationReport validate_H(const GeneratorModel& model, Assumption which,
                            std::size_t samples, std::uint64_t seed,
                            const ValidatorOptions& opts = {});
ValidationReport validate_B(const GeneratorModel& model, Assumption which,
                            std::size_t samples, std::uint64_t seed,
                            const ValidatorOptions& opts = {});

// Terminal bound check: sup over a wide grid (+-8 sqrt(T) per coordinate) of
// |h(b)| against C1. Returns the measured supremum.
double terminal_sup_probe(const TerminalCondition& terminal, const StructuralConstants& c,
                          std::size_t grid_points = 4096, std::uint64_t seed = 1);

} // namespace qbsde
