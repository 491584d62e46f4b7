#include "stablekern/estimator.hpp"

#include "stablekern/errors.hpp"

#include <cmath>
#include <string>

namespace stablekern {

using Eigen::Index;

namespace {

void require_positive(double lambda, double sigma2) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::ParameterDomain, "lambda must be positive and finite");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        fail(ErrorCode::ParameterDomain, "sigma2 must be positive and finite");
    }
}

void require_shapes(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, Index t) {
    if (a.rows() != y.size() || a.rows() < 1) {
        fail(ErrorCode::Dimension, "regressor rows must match the output length");
    }
    if (a.cols() != t) {
        fail(ErrorCode::Dimension, "regressor columns must match the kernel dimension");
    }
}

// Rows of sigma lambda^{-1/2} L^T, written below `top` rows of `m`.
void place_prior_rows(Eigen::MatrixXd& m, Index top, const BandedFactor& factor, double lambda, double sigma2) {
    const double scale = std::sqrt(sigma2 / lambda);
    const Index t = factor.dim();
    const Index bw = factor.bandwidth();
    for (Index j = 0; j < t; ++j) {
        for (Index i = j; i <= std::min(t - 1, j + bw); ++i) {
            m(top + j, i) = scale * factor(i, j);
        }
    }
}

Eigen::MatrixXd upper_r(const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Index rows = std::min(m.rows(), m.cols());
    return qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
}

// r^2 / sigma2 + (N - T) log sigma2 + T log lambda + log det K + 2 log |det R1|.
double nll_from_r(const Eigen::MatrixXd& r, Index n, const BandedFactor& factor, double lambda, double sigma2) {
    const Index t = factor.dim();
    double log_r1 = 0.0;
    for (Index i = 0; i < t; ++i) {
        const double d = std::abs(r(i, i));
        if (!(d > 0.0) || !std::isfinite(d)) {
            fail(ErrorCode::Conditioning, "stacked least-squares factor is rank deficient");
        }
        log_r1 += std::log(d);
    }
    const double res = r(t, t);
    return res * res / sigma2 + static_cast<double>(n - t) * std::log(sigma2) +
           static_cast<double>(t) * std::log(lambda) + factor.logdet_K + 2.0 * log_r1;
}

Eigen::VectorXd solve_r(const Eigen::MatrixXd& r, Index t) {
    for (Index i = 0; i < t; ++i) {
        if (!(std::abs(r(i, i)) > 0.0)) {
            fail(ErrorCode::Conditioning, "stacked least-squares factor is rank deficient");
        }
    }
    return r.topLeftCorner(t, t).triangularView<Eigen::Upper>().solve(r.col(t).head(t));
}

}  // namespace

void validate(const Dataset& data) {
    if (data.u.size() < 1 || data.u.size() != data.y.size()) {
        fail(ErrorCode::Dimension, "dataset needs equal-length u and y with N >= 1");
    }
    if (!data.u.allFinite() || !data.y.allFinite()) {
        fail(ErrorCode::ParameterDomain, "dataset contains non-finite samples");
    }
    if (data.sigma2 && !(*data.sigma2 > 0.0 && std::isfinite(*data.sigma2))) {
        fail(ErrorCode::ParameterDomain, "sigma2 must be positive and finite");
    }
}

Eigen::MatrixXd build_regressor(const Eigen::VectorXd& u, Index N, Index T) {
    if (T < 1 || N < 1) {
        fail(ErrorCode::Dimension, "regressor needs N >= 1 and T >= 1");
    }
    if (u.size() < N) {
        fail(ErrorCode::Dimension, "input sequence is shorter than N");
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N, T);
    for (Index k = 0; k < T; ++k) {
        // column k (lag k + 1) is u delayed by k + 1 samples
        const Index len = N - (k + 1);
        if (len > 0) {
            a.col(k).tail(len) = u.head(len);
        }
    }
    return a;
}

Eigen::VectorXd rls_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const BandedFactor& factor,
                             double lambda, double sigma2) {
    require_positive(lambda, sigma2);
    const Index t = factor.dim();
    require_shapes(y, a, t);
    const Index n = a.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + t, t + 1);
    m.topLeftCorner(n, t) = a;
    m.col(t).head(n) = y;
    place_prior_rows(m, n, factor, lambda, sigma2);
    return solve_r(upper_r(m), t);
}

Eigen::VectorXd rls_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::MatrixXd& k,
                             double lambda, double sigma2) {
    return rls_estimate(a, y, dense_inverse_factor(k), lambda, sigma2);
}

double nll_direct(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, const Eigen::MatrixXd& k, double lambda,
                  double sigma2) {
    require_positive(lambda, sigma2);
    require_shapes(y, a, k.rows());
    const Index n = a.rows();
    Eigen::MatrixXd s = lambda * (a * k * a.transpose());
    s.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::Conditioning, "output covariance is not numerically positive definite");
    }
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(y);
    double logdet = 0.0;
    for (Index i = 0; i < n; ++i) {
        logdet += std::log(l(i, i));
    }
    return 2.0 * logdet + w.squaredNorm();
}

double nll_qr(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, const BandedFactor& factor, double lambda,
              double sigma2) {
    require_positive(lambda, sigma2);
    const Index t = factor.dim();
    require_shapes(y, a, t);
    const Index n = a.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + t, t + 1);
    m.topLeftCorner(n, t) = a;
    m.col(t).head(n) = y;
    place_prior_rows(m, n, factor, lambda, sigma2);
    return nll_from_r(upper_r(m), n, factor, lambda, sigma2);
}

LikelihoodEvaluator::LikelihoodEvaluator(const Eigen::MatrixXd& a, const Eigen::VectorXd& y)
    : n_(a.rows()), t_(a.cols()) {
    require_shapes(y, a, t_);
    Eigen::MatrixXd ay(n_, t_ + 1);
    ay << a, y;
    r0_ = upper_r(ay);
}

Eigen::MatrixXd LikelihoodEvaluator::stacked_r(const BandedFactor& factor, double lambda, double sigma2) const {
    require_positive(lambda, sigma2);
    if (factor.dim() != t_) {
        fail(ErrorCode::Dimension, "factor dimension does not match the regressor");
    }
    const Index top = r0_.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(top + t_, t_ + 1);
    m.topRows(top) = r0_;
    place_prior_rows(m, top, factor, lambda, sigma2);
    return upper_r(m);
}

double LikelihoodEvaluator::nll(const BandedFactor& factor, double lambda, double sigma2) const {
    return nll_from_r(stacked_r(factor, lambda, sigma2), n_, factor, lambda, sigma2);
}

Eigen::VectorXd LikelihoodEvaluator::estimate(const BandedFactor& factor, double lambda, double sigma2) const {
    return solve_r(stacked_r(factor, lambda, sigma2), t_);
}

double estimate_sigma2(const Eigen::VectorXd& u, const Eigen::VectorXd& y, Index order) {
    const Index n = y.size();
    if (u.size() != n) {
        fail(ErrorCode::Dimension, "u and y must have equal length");
    }
    if (order < 1) {
        fail(ErrorCode::Dimension, "FIR order must be >= 1");
    }
    if (n <= order) {
        fail(ErrorCode::Length, "noise variance estimate needs N > order (N = " + std::to_string(n) +
                                    ", order = " + std::to_string(order) + ")");
    }
    const Eigen::MatrixXd a = build_regressor(u, n, order);
    const Eigen::VectorXd g = a.completeOrthogonalDecomposition().solve(y);
    return (y - a * g).squaredNorm() / static_cast<double>(n - order);
}

Index default_sigma2_order(Index N, Index T) {
    return std::max<Index>(1, std::min(T, N / 3));
}

}  // namespace stablekern
