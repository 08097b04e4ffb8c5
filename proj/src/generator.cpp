#include "qbsde/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbsde/rng.hpp"

namespace qbsde {

namespace {

double row_norm(std::span<const double> z, std::size_t i, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double v = z[i * d + j];
        s += v * v;
    }
    return std::sqrt(s);
}

double frobenius(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

double vec_norm(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

} // namespace

void TerminalCondition::evaluate(std::span<const double> b, std::span<double> out) const {
    EvalEnv env;
    env.b = b;
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i].evaluate(env);
}

void GeneratorModel::validate_shape() const {
    constants.validate();
    const auto n = static_cast<std::size_t>(constants.n);
    if (components.size() != n)
        throw ConfigError("generator needs exactly n = " + std::to_string(constants.n) +
                          " components, got " + std::to_string(components.size()));
    if (!diagonal.empty() && diagonal.size() != n)
        throw ConfigError("diagonal flags must have n entries");
    if (!convexity.empty() && convexity.size() != n)
        throw ConfigError("convexity tags must have n entries");
}

double GeneratorModel::component(std::size_t i, double t, std::span<const double> y,
                                 std::span<const double> z) const {
    const auto d = static_cast<std::size_t>(constants.d);
    const ComponentDef& def = components[i];
    switch (def.index()) {
        case 0: return 0.0;
        case 1: {
            const auto& q = std::get<DiagQuadComponent>(def);
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double v = z[i * d + j];
                s += v * v;
            }
            return (q.sign >= 0 ? 0.5 : -0.5) * q.gamma * s;
        }
        case 2: return std::get<LinearYComponent>(def).coef * y[i];
        case 3: {
            const auto& l = std::get<LinearZComponent>(def);
            double s = l.c;
            for (std::size_t j = 0; j < d && j < l.mu.size(); ++j)
                s += l.mu[j] * z[i * d + j];
            return s;
        }
        default: {
            EvalEnv env;
            env.t = t;
            env.y = y;
            env.z = z;
            try {
                return std::get<Expr>(def).evaluate(env);
            } catch (const ExprEvalError& e) {
                throw SolverError("generator component " + std::to_string(i + 1) + ": " +
                                  e.what());
            }
        }
    }
}

void GeneratorModel::evaluate(double t, std::span<const double> y,
                              std::span<const double> z, std::span<double> out) const {
    for (std::size_t i = 0; i < components.size(); ++i) out[i] = component(i, t, y, z);
}

double GeneratorModel::alpha_value(double t, std::span<const double> b) const {
    if (!alpha) return 0.0;
    EvalEnv env;
    env.t = t;
    env.b = b;
    return alpha->evaluate(env);
}

bool GeneratorModel::all_diagonal() const {
    if (diagonal.size() != components.size()) return false;
    return std::all_of(diagonal.begin(), diagonal.end(), [](bool f) { return f; });
}

void substitute_row(std::span<const double> z, std::size_t i, std::span<const double> row,
                    std::span<double> out, std::size_t n, std::size_t d) {
    if (i < 1 || i > n) throw ConfigError("substitute_row index out of range");
    std::copy(z.begin(), z.end(), out.begin());
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>((i - 1) * d));
}

std::vector<double> substitute_row(std::span<const double> z, std::size_t i,
                                   std::span<const double> row, std::size_t n,
                                   std::size_t d) {
    std::vector<double> out(n * d);
    substitute_row(z, i, row, out, n, d);
    return out;
}

std::string assumption_name(Assumption a) {
    switch (a) {
        case Assumption::H1: return "H1";
        case Assumption::H2: return "H2";
        case Assumption::H4: return "H4";
        case Assumption::H5: return "H5";
        case Assumption::B1: return "B1";
        case Assumption::B2: return "B2";
        case Assumption::B3: return "B3";
    }
    return "?";
}

namespace {

// One sampled point set: everything is a pure function of (seed, index), so
// shrinking a box rescales the same draw and results are reproducible for
// any worker count.
struct SamplePoint {
    double t = 0.0;
    std::vector<double> y, ybar;
    std::vector<double> z, zbar;
};

class BoxSampler {
public:
    BoxSampler(const StructuralConstants& c, const ValidatorOptions& opts,
               std::uint64_t seed)
        : c_(c), opts_(opts), seed_(seed) {}

    SamplePoint draw(std::size_t index) const {
        const auto n = static_cast<std::size_t>(c_.n);
        const auto d = static_cast<std::size_t>(c_.d);
        SamplePoint p;
        std::uint64_t slot = 0;
        auto u = [&] { return rng::uniform01(rng::keyed(seed_, index, slot++)); };
        p.t = u() * c_.T;
        p.y.resize(n);
        p.ybar.resize(n);
        p.z.resize(n * d);
        p.zbar.resize(n * d);
        for (auto& v : p.y) v = (2.0 * u() - 1.0) * opts_.r_y;
        for (auto& v : p.ybar) v = (2.0 * u() - 1.0) * opts_.r_y;
        for (auto& v : p.z) v = (2.0 * u() - 1.0) * opts_.r_z;
        for (auto& v : p.zbar) v = (2.0 * u() - 1.0) * opts_.r_z;
        return p;
    }

    // a(t, b) maximized over sampled Brownian states.
    double alpha_max(const GeneratorModel& model, std::size_t index, double t) const {
        if (!model.alpha) return 0.0;
        const auto d = static_cast<std::size_t>(c_.d);
        const double spread = 4.0 * std::sqrt(c_.T);
        std::vector<double> b(d);
        double best = 0.0;
        for (std::size_t probe = 0; probe < opts_.alpha_probes; ++probe) {
            for (std::size_t j = 0; j < d; ++j)
                b[j] = (2.0 * rng::uniform01(
                                  rng::keyed(seed_ ^ 0xA1FAULL, index,
                                             probe * d + j)) -
                        1.0) *
                       spread;
            best = std::max(best, model.alpha_value(t, b));
        }
        return best;
    }

private:
    const StructuralConstants& c_;
    const ValidatorOptions& opts_;
    std::uint64_t seed_;
};

double offrow_power_sum(std::span<const double> z, std::size_t skip, std::size_t n,
                        std::size_t d, double p) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == skip) continue;
        s += std::pow(row_norm(z, j, d), p);
    }
    return s;
}

} // namespace

ValidationReport validate_H(const GeneratorModel& model, Assumption which,
                            std::size_t samples, std::uint64_t seed,
                            const ValidatorOptions& opts) {
    if (samples < 1) throw ConfigError("validators need samples >= 1");
    const StructuralConstants& c = model.constants;
    const auto n = static_cast<std::size_t>(c.n);
    const auto d = static_cast<std::size_t>(c.d);
    const double tol = opts.tolerance;

    ValidationReport rep;
    rep.which = which;
    rep.samples = samples;
    rep.seed = seed;
    rep.box_ry = opts.r_y;
    rep.box_rz = opts.r_z;
    rep.per_component.assign(n, {});
    rep.worst_margin = std::numeric_limits<double>::infinity();

    const BoxSampler sampler(c, opts, seed);
    std::vector<double> g(n), gbar(n);

    // H5 needs per-variant counts before deciding which side each component
    // satisfies.
    std::vector<std::size_t> lower_bad(n, 0), upper_bad(n, 0);
    double h2_mult = 0.0;

    for (std::size_t s = 0; s < samples; ++s) {
        const SamplePoint p = sampler.draw(s);
        const double A = sampler.alpha_max(model, s, p.t);
        model.evaluate(p.t, p.y, p.z, g);

        switch (which) {
            case Assumption::H1: {
                bool bad = false;
                for (std::size_t i = 0; i < n; ++i) {
                    const double lhs = std::fabs(g[i]);
                    const double rhs = A + c.phi(vec_norm(p.y)) +
                                       0.5 * c.gamma * std::pow(row_norm(p.z, i, d), 2.0) +
                                       c.lambda *
                                           offrow_power_sum(p.z, i, n, d, 1.0 + c.delta);
                    const double margin = rhs - lhs;
                    rep.worst_margin = std::min(rep.worst_margin, margin);
                    if (margin < -tol) {
                        bad = true;
                        ++rep.per_component[i].violations;
                    }
                }
                if (bad) ++rep.violations;
                break;
            }
            case Assumption::H2: {
                model.evaluate(p.t, p.ybar, p.zbar, gbar);
                const double phi_v = c.phi(std::max(vec_norm(p.y), vec_norm(p.ybar)));
                const double zn = frobenius(p.z), zbn = frobenius(p.zbar);
                double dy = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double diff = p.y[i] - p.ybar[i];
                    dy += diff * diff;
                }
                dy = std::sqrt(dy);
                bool bad = false;
                for (std::size_t i = 0; i < n; ++i) {
                    double dzi = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double diff = p.z[i * d + j] - p.zbar[i * d + j];
                        dzi += diff * diff;
                    }
                    dzi = std::sqrt(dzi);
                    double dz_off = 0.0;
                    for (std::size_t r = 0; r < n; ++r) {
                        if (r == i) continue;
                        double acc = 0.0;
                        for (std::size_t j = 0; j < d; ++j) {
                            const double diff = p.z[r * d + j] - p.zbar[r * d + j];
                            acc += diff * diff;
                        }
                        dz_off += std::sqrt(acc);
                    }
                    const double lhs = std::fabs(g[i] - gbar[i]);
                    const double rhs =
                        phi_v * ((1.0 + zn + zbn) * (dy + dzi) +
                                 (1.0 + std::pow(zn, c.delta) + std::pow(zbn, c.delta)) *
                                     dz_off);
                    const double margin = rhs - lhs;
                    rep.worst_margin = std::min(rep.worst_margin, margin);
                    if (rhs > 0.0)
                        h2_mult = std::max(h2_mult, lhs / rhs);
                    else if (lhs > tol)
                        h2_mult = std::numeric_limits<double>::infinity();
                    if (margin < -tol) {
                        bad = true;
                        ++rep.per_component[i].violations;
                    }
                }
                if (bad) ++rep.violations;
                break;
            }
            case Assumption::H4: {
                bool bad = false;
                const double zn = frobenius(p.z);
                for (std::size_t i = 0; i < n; ++i) {
                    const double sgn = p.y[i] > 0.0 ? 1.0 : -1.0;
                    const double lhs = sgn * g[i];
                    const double rhs = A + c.beta * vec_norm(p.y) +
                                       c.lambda * std::pow(zn, 1.0 + c.delta) +
                                       0.5 * c.gamma * std::pow(row_norm(p.z, i, d), 2.0);
                    const double margin = rhs - lhs;
                    rep.worst_margin = std::min(rep.worst_margin, margin);
                    if (margin < -tol) {
                        bad = true;
                        ++rep.per_component[i].violations;
                    }
                }
                if (bad) ++rep.violations;
                break;
            }
            case Assumption::H5: {
                const double zn = frobenius(p.z);
                const double budget =
                    A + c.beta * vec_norm(p.y) + c.lambda * std::pow(zn, 1.0 + c.delta);
                for (std::size_t i = 0; i < n; ++i) {
                    const double quad =
                        0.5 * c.gamma_bar * std::pow(row_norm(p.z, i, d), 2.0);
                    const double lower_margin = g[i] - (quad - budget);
                    const double upper_margin = (-quad + budget) - g[i];
                    if (lower_margin < -tol) ++lower_bad[i];
                    if (upper_margin < -tol) ++upper_bad[i];
                    rep.worst_margin =
                        std::min(rep.worst_margin, std::max(lower_margin, upper_margin));
                }
                break;
            }
            default:
                throw ConfigError("validate_H handles H1, H2, H4, H5");
        }
    }

    if (which == Assumption::H2) rep.h2_multiplier = h2_mult;
    if (which == Assumption::H5) {
        for (std::size_t i = 0; i < n; ++i) {
            if (lower_bad[i] == 0)
                rep.per_component[i].h5_variant = +1;
            else if (upper_bad[i] == 0)
                rep.per_component[i].h5_variant = -1;
            rep.per_component[i].violations = std::min(lower_bad[i], upper_bad[i]);
            rep.violations += rep.per_component[i].violations;
        }
    }
    if (!std::isfinite(rep.worst_margin)) rep.worst_margin = 0.0;
    return rep;
}

ValidationReport validate_B(const GeneratorModel& model, Assumption which,
                            std::size_t samples, std::uint64_t seed,
                            const ValidatorOptions& opts) {
    if (samples < 1) throw ConfigError("validators need samples >= 1");
    const StructuralConstants& c = model.constants;
    const auto n = static_cast<std::size_t>(c.n);
    const auto d = static_cast<std::size_t>(c.d);
    const double tol = opts.tolerance;

    ValidationReport rep;
    rep.which = which;
    rep.samples = samples;
    rep.seed = seed;
    rep.box_ry = opts.r_y;
    rep.box_rz = opts.r_z;
    rep.per_component.assign(n, {});
    rep.worst_margin = std::numeric_limits<double>::infinity();

    const BoxSampler sampler(c, opts, seed);
    std::vector<double> g(n), gbar(n), gmid(n), zsub(n * d), zmid(n * d);
    std::vector<std::size_t> cvx_bad(n, 0), ccv_bad(n, 0);

    for (std::size_t s = 0; s < samples; ++s) {
        const SamplePoint p = sampler.draw(s);
        const double A = sampler.alpha_max(model, s, p.t);
        model.evaluate(p.t, p.y, p.z, g);

        switch (which) {
            case Assumption::B1: {
                bool bad = false;
                for (std::size_t i = 0; i < n; ++i) {
                    // Diagonal dependence: perturbing the off rows must not move g^i.
                    std::copy(p.z.begin(), p.z.end(), zsub.begin());
                    for (std::size_t r = 0; r < n; ++r) {
                        if (r == i) continue;
                        for (std::size_t j = 0; j < d; ++j)
                            zsub[r * d + j] = p.zbar[r * d + j];
                    }
                    const double gi_sub = model.component(i, p.t, p.y, zsub);
                    if (std::fabs(gi_sub - g[i]) >
                        1e-12 * std::max(1.0, std::fabs(g[i]))) {
                        bad = true;
                        ++rep.per_component[i].violations;
                        rep.worst_margin =
                            std::min(rep.worst_margin, -std::fabs(gi_sub - g[i]));
                        continue;
                    }
                    const double lhs = std::fabs(g[i]);
                    const double rhs = A + c.beta * vec_norm(p.y) +
                                       0.5 * c.gamma * std::pow(row_norm(p.z, i, d), 2.0);
                    const double margin = rhs - lhs;
                    rep.worst_margin = std::min(rep.worst_margin, margin);
                    if (margin < -tol) {
                        bad = true;
                        ++rep.per_component[i].violations;
                    }
                }
                if (bad) ++rep.violations;
                break;
            }
            case Assumption::B2: {
                model.evaluate(p.t, p.ybar, p.z, gbar);
                double dg = 0.0, dy = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    dg += (g[i] - gbar[i]) * (g[i] - gbar[i]);
                    dy += (p.y[i] - p.ybar[i]) * (p.y[i] - p.ybar[i]);
                }
                const double margin = c.beta * std::sqrt(dy) - std::sqrt(dg);
                rep.worst_margin = std::min(rep.worst_margin, margin);
                if (margin < -tol) ++rep.violations;
                break;
            }
            case Assumption::B3: {
                model.evaluate(p.t, p.y, p.zbar, gbar);
                for (std::size_t j = 0; j < n * d; ++j)
                    zmid[j] = 0.5 * (p.z[j] + p.zbar[j]);
                model.evaluate(p.t, p.y, zmid, gmid);
                for (std::size_t i = 0; i < n; ++i) {
                    const double chord = 0.5 * (g[i] + gbar[i]);
                    if (gmid[i] > chord + tol) ++cvx_bad[i];
                    if (gmid[i] < chord - tol) ++ccv_bad[i];
                }
                break;
            }
            default:
                throw ConfigError("validate_B handles B1, B2, B3");
        }
    }

    if (which == Assumption::B3) {
        for (std::size_t i = 0; i < n; ++i) {
            if (cvx_bad[i] == 0)
                rep.per_component[i].midpoint_tag = ConvexityTag::Convex;
            else if (ccv_bad[i] == 0)
                rep.per_component[i].midpoint_tag = ConvexityTag::Concave;
            rep.per_component[i].violations = std::min(cvx_bad[i], ccv_bad[i]);
            rep.violations += rep.per_component[i].violations;
        }
    }
    if (!std::isfinite(rep.worst_margin)) rep.worst_margin = 0.0;
    return rep;
}

double terminal_sup_probe(const TerminalCondition& terminal, const StructuralConstants& c,
                          std::size_t grid_points, std::uint64_t seed) {
    const auto d = static_cast<std::size_t>(c.d);
    const auto n = static_cast<std::size_t>(c.n);
    const double spread = 8.0 * std::sqrt(c.T);
    std::vector<double> b(d), xi(n);
    double sup = 0.0;
    for (std::size_t s = 0; s < grid_points; ++s) {
        for (std::size_t j = 0; j < d; ++j)
            b[j] = (2.0 * rng::uniform01(rng::keyed(seed, s, j)) - 1.0) * spread;
        terminal.evaluate(b, xi);
        sup = std::max(sup, vec_norm(xi));
    }
    return sup;
}

} // namespace qbsde
