#pragma once

#include <memory>
#include <optional>
#include <string>

#include "qbsde/expr.hpp"

namespace qbsde {

// Nondecreasing continuous growth modulus on [0, inf) with phi(0) = 0.
// Either the builtin power family coef*x^exponent or a user expression in x.
class PhiFunction {
public:
    PhiFunction() = default; // identically zero

    static PhiFunction zero() { return PhiFunction(); }
    static PhiFunction power(double coef, double exponent);
    static PhiFunction custom(Expr expr);

    double operator()(double s) const;

    bool is_zero() const { return kind_ == Kind::Zero || (kind_ == Kind::Power && coef_ == 0.0); }
    std::string describe() const;

    // Checks phi(0) = 0 and monotonicity on a geometric sample grid.
    void validate() const;

private:
    enum class Kind { Zero, Power, Custom };
    Kind kind_ = Kind::Zero;
    double coef_ = 0.0;
    double exponent_ = 1.0;
    std::shared_ptr<const Expr> expr_;
};

// The constants of the structural assumptions: dimensions, horizon, and the
// growth/continuity budget (beta, gamma, gamma_bar, lambda, delta, C1, C2, phi).
struct StructuralConstants {
    int n = 1;
    int d = 1;
    double T = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    double gamma_bar = 1.0;
    double lambda = 0.0;
    double delta = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    PhiFunction phi;

    // Throws ConfigError when an invariant is broken.
    void validate() const;
};

} // namespace qbsde
