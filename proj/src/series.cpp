#include "stablekern/series.hpp"

#include "stablekern/errors.hpp"

#include <cmath>
#include <string>

namespace stablekern::series {

namespace {

// Far beyond anything a valid beta needs; reaching it means beta is too close to 1.
constexpr std::size_t kMaxTerms = 20'000'000;

[[noreturn]] void non_convergent(double beta) {
    fail(ErrorCode::ParameterDomain,
         "series tail does not converge within the term budget for beta = " + std::to_string(beta));
}

// b_j of 1 / ((1 - z)^(order - 1) (1 - alpha z)): alpha^j summed order - 1 times.
class ImpulseStream {
public:
    ImpulseStream(int order, double alpha) : sums_(static_cast<std::size_t>(order), 0.0L), alpha_(alpha) {}

    long double operator[](std::size_t k) {
        while (values_.size() <= k) {
            advance();
        }
        return values_[k];
    }

private:
    void advance() {
        sums_[0] = values_.empty() ? 1.0L : sums_[0] * alpha_;
        for (std::size_t i = 1; i < sums_.size(); ++i) {
            sums_[i] += sums_[i - 1];
        }
        values_.push_back(sums_.back());
    }

    std::vector<long double> sums_;
    long double alpha_;
    std::vector<long double> values_;
};

}  // namespace

ToeplitzSeq prefilter(int order, double alpha) {
    if (order < 1) {
        fail(ErrorCode::ParameterDomain, "prefilter order must be >= 1");
    }
    ToeplitzSeq p{1.0};
    for (int k = 0; k < order - 1; ++k) {
        ToeplitzSeq next(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            next[i] += p[i];
            next[i + 1] -= p[i];
        }
        p = std::move(next);
    }
    ToeplitzSeq out(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] += p[i];
        out[i + 1] -= alpha * p[i];
    }
    if (out.back() == 0.0 && out.size() > 1) {
        out.pop_back();
    }
    return out;
}

std::vector<double> lag_sums(int order, double alpha, double beta, Eigen::Index lags) {
    if (!(beta > 0.0 && beta < 1.0)) {
        fail(ErrorCode::ParameterDomain, "series evaluation requires 0 < beta < 1");
    }
    const ToeplitzSeq taps = prefilter(order, alpha);
    std::vector<double> w(static_cast<std::size_t>(lags), 0.0);
    if (taps.size() == 1) {
        // diagonal operator: only the zero lag survives
        if (!w.empty()) {
            w[0] = 1.0;
        }
        return w;
    }
    ImpulseStream b(order, alpha);
    for (std::size_t tau = 0; tau < w.size(); ++tau) {
        long double sum = 0.0L;
        for (std::size_t j = 0;; ++j) {
            if (j > kMaxTerms) {
                non_convergent(beta);
            }
            const long double bj = b[j];
            const long double bjt = b[j + tau];
            const long double term = std::pow(static_cast<long double>(beta), static_cast<long double>(j)) * bj * bjt;
            sum += term;
            const long double ratio = beta * (b[j + 1] / bj) * (b[j + tau + 1] / bjt);
            if (ratio < 1.0 && term * ratio / (1.0 - ratio) <= kTailTolerance * sum) {
                break;
            }
        }
        w[tau] = static_cast<double>(sum);
    }
    return w;
}

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

MatrixXld gram_ld(int order_in, double alpha, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) {
        fail(ErrorCode::ParameterDomain, "series evaluation requires 0 < beta < 1");
    }
    const ToeplitzSeq prefilter = series::prefilter(order_in, alpha);
    const auto order = static_cast<Eigen::Index>(prefilter.size()) - 1;
    if (order < 1) {
        return MatrixXld(0, 0);
    }
    double p_abs = 0.0;
    for (double v : prefilter) {
        p_abs += std::abs(v);
    }

    ImpulseStream b(order_in, alpha);
    MatrixXld m = MatrixXld::Zero(order, order);
    for (Eigen::Index i = 0; i < order; ++i) {
        m(i, i) = std::pow(static_cast<long double>(beta), static_cast<long double>(i + 1 - order));
    }

    Eigen::Matrix<long double, Eigen::Dynamic, 1> u(order);
    for (std::size_t step = 1;; ++step) {
        if (step > kMaxTerms) {
            non_convergent(beta);
        }
        for (Eigen::Index i = 0; i < order; ++i) {
            // 0-based i corresponds to u_m[i + 1]
            // the full convolution vanishes, so sum the i + 1 omitted taps instead
            long double acc = 0.0L;
            for (Eigen::Index l = order - i; l <= order; ++l) {
                const auto n = static_cast<Eigen::Index>(step) + order - 1 - i - l;
                if (n >= 0) {
                    acc -= static_cast<long double>(b[static_cast<std::size_t>(n)]) *
                           static_cast<long double>(prefilter[static_cast<std::size_t>(l)]);
                }
            }
            u(i) = acc;
        }
        const long double weight = std::pow(static_cast<long double>(beta), static_cast<long double>(step));
        m.noalias() += weight * u * u.transpose();

        // |u_m[i]| <= p_abs * b_{m+delta-1}; the envelope ratio is non-increasing.
        const auto top = step + static_cast<std::size_t>(order) - 1;
        const long double lead = b[top];
        const long double envelope = weight * p_abs * p_abs * lead * lead;
        const long double growth = b[top + 1] / lead;
        const long double ratio = beta * growth * growth;
        if (ratio < 1.0 && envelope * ratio / (1.0 - ratio) <= kTailTolerance * m.trace()) {
            break;
        }
    }
    return m;
}

}  // namespace

Eigen::MatrixXd trailing_gram(int order, double alpha, double beta) {
    return gram_ld(order, alpha, beta).cast<double>();
}

TrailingFactor trailing_factor(int order, double alpha, double beta, Eigen::Index T) {
    const MatrixXld m = gram_ld(order, alpha, beta);
    const Eigen::Index e = m.rows();
    TrailingFactor out;
    out.factor = Eigen::MatrixXd(e, e);
    if (e == 0) {
        return out;
    }
    // J M J = R R^T gives M^{-1} = (J R^{-T} J)(J R^{-T} J)^T with J R^{-T} J lower.
    const MatrixXld flipped = m.reverse();
    const Eigen::LLT<MatrixXld> llt(flipped);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::Factorization, "trailing Gram matrix is not numerically positive definite");
    }
    const MatrixXld r = llt.matrixL();
    const MatrixXld r_inv = r.triangularView<Eigen::Lower>().solve(MatrixXld::Identity(e, e));
    const MatrixXld lower = r_inv.transpose().reverse();
    const long double log_beta = std::log(static_cast<long double>(beta));
    const long double scale = std::exp(-0.5L * static_cast<long double>(T) * log_beta);
    out.factor = (scale * lower).cast<double>();
    long double log_det_m = 0.0L;
    for (Eigen::Index i = 0; i < e; ++i) {
        log_det_m += 2.0L * std::log(r(i, i));
    }
    out.logdet = static_cast<double>(-static_cast<long double>(T * e) * log_beta - log_det_m);
    return out;
}

}  // namespace stablekern::series
