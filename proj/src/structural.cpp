#include "qbsde/structural.hpp"

#include <cmath>

namespace qbsde {

PhiFunction PhiFunction::power(double coef, double exponent) {
    PhiFunction p;
    p.kind_ = Kind::Power;
    p.coef_ = coef;
    p.exponent_ = exponent;
    return p;
}

PhiFunction PhiFunction::custom(Expr expr) {
    PhiFunction p;
    p.kind_ = Kind::Custom;
    p.expr_ = std::make_shared<Expr>(std::move(expr));
    return p;
}

double PhiFunction::operator()(double s) const {
    switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Power: return coef_ * std::pow(s, exponent_);
        case Kind::Custom: {
            EvalEnv env;
            env.x = s;
            return expr_->evaluate(env);
        }
    }
    return 0.0;
}

std::string PhiFunction::describe() const {
    switch (kind_) {
        case Kind::Zero: return "0";
        case Kind::Power:
            return std::to_string(coef_) + "*x^" + std::to_string(exponent_);
        case Kind::Custom: return expr_->pretty();
    }
    return "?";
}

void PhiFunction::validate() const {
    const double at0 = (*this)(0.0);
    if (at0 != 0.0)
        throw ConfigError("phi(0) must be 0, got " + std::to_string(at0));
    if (kind_ == Kind::Power && (coef_ < 0.0 || exponent_ <= 0.0))
        throw ConfigError("builtin phi needs coef >= 0 and exponent > 0");
    // Monotonicity probed on a geometric grid; exact verification is out of
    // reach for user expressions.
    double prev = 0.0;
    double s = 1e-6;
    for (int k = 0; k < 64; ++k, s *= 1.5) {
        const double v = (*this)(s);
        if (!std::isfinite(v) || v < prev - 1e-12 * std::fabs(prev))
            throw ConfigError("phi must be finite and nondecreasing; fails near x=" +
                              std::to_string(s));
        prev = v;
    }
}

void StructuralConstants::validate() const {
    if (n < 1 || d < 1) throw ConfigError("dimensions n, d must be >= 1");
    if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
    if (beta < 0.0) throw ConfigError("beta must be >= 0");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (!(gamma_bar > 0.0) || gamma_bar > gamma)
        throw ConfigError("gamma_bar must satisfy 0 < gamma_bar <= gamma");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (delta < 0.0 || delta >= 1.0) throw ConfigError("delta must lie in [0, 1)");
    if (C1 < 0.0 || C2 < 0.0) throw ConfigError("C1, C2 must be >= 0");
    phi.validate();
}

} // namespace qbsde
