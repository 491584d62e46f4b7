#include "stablekern/factor.hpp"

#include "stablekern/errors.hpp"
#include "stablekern/series.hpp"

#include <cmath>
#include <string>

namespace stablekern {

using Eigen::Index;

BandedFactor::BandedFactor(Index dim, Index bandwidth) : dim_(dim), bandwidth_(bandwidth) {
    if (dim < 0 || bandwidth < 0) {
        fail(ErrorCode::Dimension, "banded factor needs non-negative dimension and bandwidth");
    }
    if (dim > 0 && bandwidth_ > dim - 1) {
        bandwidth_ = dim - 1;
    }
    diagonals_.reserve(static_cast<std::size_t>(bandwidth_ + 1));
    for (Index d = 0; d <= bandwidth_; ++d) {
        diagonals_.emplace_back(Eigen::VectorXd::Zero(dim - d));
    }
}

double BandedFactor::operator()(Index i, Index j) const {
    const Index d = i - j;
    if (d < 0 || d > bandwidth_) {
        return 0.0;
    }
    return diagonals_[static_cast<std::size_t>(d)](j);
}

void BandedFactor::set(Index i, Index j, double value) {
    const Index d = i - j;
    if (d < 0 || d > bandwidth_) {
        fail(ErrorCode::Dimension, "entry outside the stored band");
    }
    diagonals_[static_cast<std::size_t>(d)](j) = value;
}

Eigen::MatrixXd BandedFactor::dense() const {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(dim_, dim_);
    for (Index d = 0; d <= bandwidth_ && d < dim_; ++d) {
        const auto& diag = diagonals_[static_cast<std::size_t>(d)];
        for (Index j = 0; j < diag.size(); ++j) {
            l(j + d, j) = diag(j);
        }
    }
    return l;
}

double BandedFactor::log_diagonal_sum() const {
    if (dim_ == 0) {
        return 0.0;
    }
    return diagonals_.front().array().log().sum();
}

Eigen::VectorXd BandedFactor::solve_lower(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = b;
    for (Index i = 0; i < dim_; ++i) {
        double acc = x(i);
        for (Index j = std::max<Index>(0, i - bandwidth_); j < i; ++j) {
            acc -= (*this)(i, j) * x(j);
        }
        x(i) = acc / (*this)(i, i);
    }
    return x;
}

BandedFactor banded_cholesky(const Eigen::MatrixXd& a, Index bandwidth) {
    const Index n = a.rows();
    if (a.cols() != n) {
        fail(ErrorCode::Dimension, "banded_cholesky: matrix is not square");
    }
    BandedFactor l(n, bandwidth);
    const Index m = l.bandwidth();
    for (Index j = 0; j < n; ++j) {
        double pivot = a(j, j);
        for (Index k = std::max<Index>(0, j - m); k < j; ++k) {
            pivot -= l(j, k) * l(j, k);
        }
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            fail(ErrorCode::Factorization,
                 "banded_cholesky: non-positive pivot at row " + std::to_string(j + 1));
        }
        const double ljj = std::sqrt(pivot);
        l.set(j, j, ljj);
        for (Index i = j + 1; i <= std::min(n - 1, j + m); ++i) {
            double acc = a(i, j);
            for (Index k = std::max<Index>(0, i - m); k < j; ++k) {
                acc -= l(i, k) * l(j, k);
            }
            l.set(i, j, acc / ljj);
        }
    }
    l.logdet_K = -2.0 * l.log_diagonal_sum();
    return l;
}

BandedFactor dense_inverse_factor(const Eigen::MatrixXd& k) {
    const Index n = k.rows();
    if (n == 0 || k.cols() != n) {
        fail(ErrorCode::Dimension, "dense_inverse_factor: matrix must be square and non-empty");
    }
    const Eigen::MatrixXd reversed = k.reverse();
    Eigen::LLT<Eigen::MatrixXd> llt(reversed);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::Factorization, "kernel matrix is not positive definite");
    }
    const Eigen::MatrixXd r = llt.matrixL();
    for (Index i = 0; i < n; ++i) {
        if (!(r(i, i) > 0.0) || !std::isfinite(r(i, i))) {
            fail(ErrorCode::Factorization, "kernel matrix is not positive definite");
        }
    }
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    BandedFactor l(n, n - 1);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j <= i; ++j) {
            l.set(i, j, r_inv(n - 1 - j, n - 1 - i));
        }
    }
    l.logdet_K = 2.0 * r.diagonal().array().log().sum();
    return l;
}

namespace {

void require_banded(const KernelSpec& spec) {
    if (spec.family == Family::SS) {
        fail(ErrorCode::ParameterDomain, "SS kernel has no banded inverse decomposition");
    }
}

void require_dimension(const detail::Structure& s, Index T) {
    if (T < 1) {
        fail(ErrorCode::Dimension, "kernel dimension T must be >= 1");
    }
    if (T < s.order) {
        fail(ErrorCode::Dimension, "T = " + std::to_string(T) + " is smaller than the kernel order " +
                                       std::to_string(s.order) + " (trailing block does not fit)");
    }
}

void flip_signs(Eigen::MatrixXd& m) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if ((i + j) % 2 == 1) {
                m(i, j) = -m(i, j);
            }
        }
    }
}

}  // namespace

InverseDecomposition inverse_decomposition(const KernelSpec& spec, Index T) {
    validate(spec);
    require_banded(spec);
    const auto s = detail::structure_of(spec);
    require_dimension(s, T);

    InverseDecomposition dec;
    dec.kappa = normalization_kappa(spec);
    dec.beta = s.beta;
    dec.dim = T;
    dec.flipped = s.flipped;

    const double a = s.alpha;
    const double b = s.beta;
    const double scale = std::pow(b, -static_cast<double>(T));
    if (s.order == 0) {
        dec.prefilter = {1.0};
        dec.trailing = Eigen::MatrixXd(0, 0);
    } else if (s.order == 1) {
        dec.prefilter = {1.0, -a};
        dec.trailing = Eigen::MatrixXd::Constant(1, 1, (1.0 - a * a * b) * scale);
    } else if (s.order == 2) {
        dec.prefilter = {1.0, -(1.0 + a), a};
        Eigen::MatrixXd bt(2, 2);
        bt(0, 0) = b * (1.0 + a * b);
        bt(0, 1) = a * b * b * (1.0 + a);
        bt(1, 0) = bt(0, 1);
        bt(1, 1) = (1.0 - b - a * a * b) * (1.0 - a * b) + 2.0 * a * a * b * b;
        dec.trailing = (1.0 - a * b) * scale * bt;
    } else {
        dec.prefilter = series::prefilter(s.order, a);
        const auto tf = series::trailing_factor(s.order, a, b, T);
        dec.trailing_factor = tf.factor;
        dec.trailing_logdet = tf.logdet;
        dec.trailing = tf.factor * tf.factor.transpose();
        dec.trailing = 0.5 * (dec.trailing + dec.trailing.transpose()).eval();
        return dec;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(dec.trailing);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::Factorization, "trailing block of the inverse decomposition is not positive definite");
    }
    dec.trailing_factor = llt.matrixL();
    dec.trailing_logdet = 2.0 * dec.trailing_factor.diagonal().array().log().sum();
    return dec;
}

Eigen::MatrixXd build_inverse(const KernelSpec& spec, Index T) {
    if (spec.family == Family::SS) {
        const Eigen::MatrixXd l = inverse_cholesky(spec, T).dense();
        return l * l.transpose();
    }
    const auto dec = inverse_decomposition(spec, T);
    const Index e = dec.order();
    const Index lead = T - e;

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(T, T);
    for (Index k = 0; k < lead; ++k) {
        d(k, k) = std::pow(dec.beta, -static_cast<double>(k + 1));
    }
    if (e > 0) {
        d.bottomRightCorner(e, e) = dec.trailing;
    }
    const Eigen::MatrixXd p = lower_toeplitz(dec.prefilter, T);
    Eigen::MatrixXd inv = (p * d * p.transpose()) / dec.kappa;
    inv = 0.5 * (inv + inv.transpose()).eval();
    if (dec.flipped) {
        flip_signs(inv);
    }
    return inv;
}

namespace {

// Order-1 factor: K^{-1} = kappa^{-1} F_alpha D F_alpha^T with the trailing
// entry of D equal to (1 - alpha^2 beta) beta^{-T}.
BandedFactor order1_factor(double alpha, double beta, double kappa, Index T) {
    BandedFactor l(T, 1);
    for (Index t = 1; t <= T; ++t) {
        const double bt = std::pow(beta, static_cast<double>(t));
        if (t < T) {
            l.set(t - 1, t - 1, 1.0 / std::sqrt(kappa * bt));
            l.set(t, t - 1, -alpha / std::sqrt(kappa * bt));
        } else {
            l.set(t - 1, t - 1, std::sqrt((1.0 - alpha * alpha * beta) / (kappa * bt)));
        }
    }
    const double n = static_cast<double>(T);
    l.logdet_K = n * std::log(kappa) + 0.5 * n * (n + 1.0) * std::log(beta) - std::log(1.0 - alpha * alpha * beta);
    return l;
}

BandedFactor tc2_factor(double beta, Index T) {
    BandedFactor l(T, 2);
    const double c = std::pow(1.0 - beta, 3.0);
    const auto bp = [beta](Index k) { return std::pow(beta, static_cast<double>(k)); };
    for (Index t = 1; t <= T; ++t) {
        if (t <= T - 2) {
            l.set(t - 1, t - 1, 1.0 / std::sqrt(c * bp(t)));
        }
        if (t >= 2 && t <= T - 1) {
            l.set(t - 1, t - 2, -2.0 / std::sqrt(c * bp(t - 1)));
        }
        if (t >= 3) {
            l.set(t - 1, t - 3, 1.0 / std::sqrt(c * bp(t - 2)));
        }
    }
    l.set(T - 2, T - 2, std::sqrt(bp(-T + 1) * (1.0 + beta)) / (1.0 - beta));
    l.set(T - 1, T - 2, -2.0 * std::sqrt(bp(-T + 1)) / ((1.0 - beta) * std::sqrt(1.0 + beta)));
    l.set(T - 1, T - 1, std::sqrt(bp(-T) / (1.0 + beta)));
    const double n = static_cast<double>(T);
    l.logdet_K = 0.5 * n * (n + 1.0) * std::log(beta) + (3.0 * n - 4.0) * std::log(1.0 - beta);
    return l;
}

BandedFactor dc2_factor(double alpha, double beta, Index T) {
    BandedFactor l(T, 2);
    const double kappa = (1.0 - beta) * (1.0 - alpha * beta) * (1.0 - alpha * alpha * beta);
    const auto bp = [beta](Index k) { return std::pow(beta, static_cast<double>(k)); };
    for (Index t = 1; t <= T; ++t) {
        if (t <= T - 2) {
            l.set(t - 1, t - 1, 1.0 / std::sqrt(kappa * bp(t)));
        }
        if (t >= 2 && t <= T - 1) {
            l.set(t - 1, t - 2, -(1.0 + alpha) / std::sqrt(kappa * bp(t - 1)));
        }
        if (t >= 3) {
            l.set(t - 1, t - 3, alpha / std::sqrt(kappa * bp(t - 2)));
        }
    }
    const double ab = 1.0 + alpha * beta;
    const double ob = 1.0 - beta;
    const double a2b = 1.0 - alpha * alpha * beta;
    l.set(T - 2, T - 2, std::sqrt(ab * bp(-T + 1) / (ob * a2b)));
    l.set(T - 1, T - 2, -(1.0 + alpha) * std::sqrt(bp(-T + 1)) / std::sqrt(ab * ob * a2b));
    l.set(T - 1, T - 1, std::sqrt(bp(-T) / ab));
    const double n = static_cast<double>(T);
    l.logdet_K = 0.5 * n * (n + 1.0) * std::log(beta) + (n - 2.0) * std::log(1.0 - alpha * beta) +
                 (n - 1.0) * std::log(ob) + (n - 1.0) * std::log(a2b);
    return l;
}

// L = kappa^{-1/2} P_T G with G = diag(beta^{-1/2}, ..., beta^{-(T-e)/2}) (+) chol(B_T).
// P_T is unit lower triangular, so this is the Cholesky factor of K^{-1}; forming
// it directly avoids the cancellation in the assembled P_T D_T P_T^T.
BandedFactor decomposition_factor(const InverseDecomposition& dec) {
    const Index T = dec.dim;
    const Index e = dec.order();
    const Index lead = T - e;
    const Eigen::MatrixXd& c = dec.trailing_factor;
    const double scale = 1.0 / std::sqrt(dec.kappa);
    const auto& p = dec.prefilter;
    BandedFactor l(T, e);
    for (Index j = 0; j < lead; ++j) {
        const double g = std::pow(dec.beta, -0.5 * static_cast<double>(j + 1));
        for (Index i = j; i <= std::min(T - 1, j + e); ++i) {
            l.set(i, j, scale * p[static_cast<std::size_t>(i - j)] * g);
        }
    }
    for (Index j = lead; j < T; ++j) {
        for (Index i = j; i < T; ++i) {
            double acc = 0.0;
            for (Index k = j; k <= i; ++k) {
                acc += p[static_cast<std::size_t>(i - k)] * c(k - lead, j - lead);
            }
            l.set(i, j, scale * acc);
        }
    }
    double log_d = 0.0;
    for (Index k = 1; k <= lead; ++k) {
        log_d -= static_cast<double>(k) * std::log(dec.beta);
    }
    log_d += dec.trailing_logdet;
    l.logdet_K = static_cast<double>(T) * std::log(dec.kappa) - log_d;
    return l;
}

// SS is exponentially convex with rate gamma^3: K = E W E, E = diag(gamma^{3t/2}),
// W Toeplitz with w(tau) = gamma^{tau/2}/2 - gamma^{3tau/2}/6. Factoring W instead
// of K keeps the graded scale out of the dense factorization.
BandedFactor ss_factor(double gamma, Index T) {
    Eigen::MatrixXd w(T, T);
    for (Index t = 0; t < T; ++t) {
        for (Index s = 0; s < T; ++s) {
            const double tau = static_cast<double>(std::abs(t - s));
            w(t, s) = 0.5 * std::pow(gamma, 0.5 * tau) - std::pow(gamma, 1.5 * tau) / 6.0;
        }
    }
    const BandedFactor lw = dense_inverse_factor(w);
    BandedFactor l(T, T - 1);
    for (Index i = 0; i < T; ++i) {
        const double d = std::pow(gamma, -1.5 * static_cast<double>(i + 1));
        if (!std::isfinite(d)) {
            fail(ErrorCode::Conditioning, "SS envelope overflows at this gamma and dimension");
        }
        for (Index j = 0; j <= i; ++j) {
            l.set(i, j, d * lw(i, j));
        }
    }
    const double n = static_cast<double>(T);
    l.logdet_K = lw.logdet_K + 1.5 * n * (n + 1.0) * std::log(gamma);
    return l;
}

void flip_signs(BandedFactor& l) {
    for (Index d = 1; d <= l.bandwidth(); d += 2) {
        for (Index j = 0; j + d < l.dim(); ++j) {
            l.set(j + d, j, -l(j + d, j));
        }
    }
}

}  // namespace

BandedFactor inverse_cholesky(const KernelSpec& spec, Index T) {
    validate(spec);
    if (spec.family == Family::SS) {
        if (T < 1) {
            fail(ErrorCode::Dimension, "kernel dimension T must be >= 1");
        }
        return ss_factor(spec.gamma, T);
    }
    const auto s = detail::structure_of(spec);
    require_dimension(s, T);

    BandedFactor l;
    if (s.order == 0) {
        l = BandedFactor(T, 0);
        for (Index t = 1; t <= T; ++t) {
            l.set(t - 1, t - 1, std::pow(s.beta, -0.5 * static_cast<double>(t)));
        }
        const double n = static_cast<double>(T);
        l.logdet_K = 0.5 * n * (n + 1.0) * std::log(s.beta);
    } else if (s.order == 1) {
        l = order1_factor(s.alpha, s.beta, normalization_kappa(spec), T);
    } else if (s.order == 2) {
        l = s.alpha == 1.0 ? tc2_factor(s.beta, T) : dc2_factor(s.alpha, s.beta, T);
    } else {
        KernelSpec unflipped = spec;
        if (spec.family == Family::HFd) unflipped.family = Family::TCd;
        if (spec.family == Family::HCd) unflipped.family = Family::DCd;
        l = decomposition_factor(inverse_decomposition(unflipped, T));
    }
    if (s.flipped) {
        flip_signs(l);
    }
    return l;
}

}  // namespace stablekern
