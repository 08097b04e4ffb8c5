#include "qbsde/regression.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "qbsde/parallel.hpp"

namespace qbsde {

PolyBasis::PolyBasis(std::size_t d, int degree) : d_(d), degree_(std::max(degree, 1)) {
    if (d_ <= 2) {
        // All monomials of total degree <= degree.
        std::vector<int> e(d_, 0);
        const auto total = [&] {
            int s = 0;
            for (int v : e) s += v;
            return s;
        };
        for (;;) {
            if (total() <= degree_) exponents_.push_back(e);
            // odometer over per-coordinate exponents 0..degree
            std::size_t pos = 0;
            while (pos < d_) {
                if (++e[pos] <= degree_) break;
                e[pos] = 0;
                ++pos;
            }
            if (pos == d_) break;
        }
        std::sort(exponents_.begin(), exponents_.end(),
                  [](const std::vector<int>& a, const std::vector<int>& b) {
                      int sa = 0, sb = 0;
                      for (int v : a) sa += v;
                      for (int v : b) sb += v;
                      return sa != sb ? sa < sb : a < b;
                  });
    } else {
        exponents_.emplace_back(d_, 0); // constant
        for (std::size_t j = 0; j < d_; ++j)
            for (int p = 1; p <= degree_; ++p) {
                std::vector<int> e(d_, 0);
                e[j] = p;
                exponents_.push_back(std::move(e));
            }
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = i + 1; j < d_; ++j) {
                std::vector<int> e(d_, 0);
                e[i] = 1;
                e[j] = 1;
                exponents_.push_back(std::move(e));
            }
    }
}

void PolyBasis::row(std::span<const double> x, std::span<double> out) const {
    for (std::size_t c = 0; c < exponents_.size(); ++c) {
        double v = 1.0;
        const auto& e = exponents_[c];
        for (std::size_t j = 0; j < d_; ++j) {
            const int p = e[j];
            for (int q = 0; q < p; ++q) v *= x[j];
        }
        out[c] = v;
    }
}

struct NodeRegression::Impl {
    Eigen::MatrixXd design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    std::size_t M = 0;
};

NodeRegression::NodeRegression(const PathEnsemble& e, std::size_t k, int degree)
    : impl_(std::make_unique<Impl>()) {
    const std::size_t M = e.paths();
    const std::size_t d = e.dim();
    const PolyBasis basis(d, degree);
    const std::size_t p = basis.count();

    const double t = e.grid().node(k);
    const double scale = 1.0 / std::sqrt(std::max(t, e.grid().dt()));

    impl_->M = M;
    impl_->design.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(p));
    parallel_chunks(M, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<double> x(d), row(p);
        for (std::size_t m = lo; m < hi; ++m) {
            const auto state = e.state(m, k);
            for (std::size_t j = 0; j < d; ++j) x[j] = state[j] * scale;
            basis.row(x, row);
            for (std::size_t c = 0; c < p; ++c)
                impl_->design(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) =
                    row[c];
        }
    });
    impl_->qr.setThreshold(1e-10);
    impl_->qr.compute(impl_->design);
}

NodeRegression::~NodeRegression() = default;
NodeRegression::NodeRegression(NodeRegression&&) noexcept = default;
NodeRegression& NodeRegression::operator=(NodeRegression&&) noexcept = default;

std::size_t NodeRegression::paths() const { return impl_->M; }

std::vector<double> NodeRegression::fit(std::span<const double> target,
                                        RegressionDiagnostics* diag) const {
    const auto M = static_cast<Eigen::Index>(impl_->M);
    Eigen::Map<const Eigen::VectorXd> y(target.data(), M);
    const Eigen::VectorXd coef = impl_->qr.solve(y);
    const Eigen::VectorXd fitted = impl_->design * coef;
    if (diag) {
        diag->rank = impl_->qr.rank();
        diag->dropped_columns =
            static_cast<std::size_t>(impl_->design.cols() - impl_->qr.rank());
        diag->residual_rms = (y - fitted).norm() / std::sqrt(static_cast<double>(M));
    }
    return {fitted.data(), fitted.data() + M};
}

} // namespace qbsde
