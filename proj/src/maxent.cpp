#include "stablekern/maxent.hpp"

#include "stablekern/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace stablekern {

using Eigen::Index;

BandSpec::BandSpec(Index dim, Index bandwidth)
    : bandwidth_(bandwidth), values_(Eigen::MatrixXd::Zero(dim, dim)) {
    if (dim < 1) {
        fail(ErrorCode::Dimension, "band spec dimension must be >= 1");
    }
    if (bandwidth < 0 || bandwidth >= dim) {
        fail(ErrorCode::Dimension, "bandwidth must satisfy 0 <= m < T");
    }
}

BandSpec BandSpec::from_matrix(const Eigen::MatrixXd& full, Index bandwidth) {
    if (full.rows() != full.cols()) {
        fail(ErrorCode::Dimension, "band spec source must be square");
    }
    BandSpec spec(full.rows(), bandwidth);
    for (Index t = 0; t < full.rows(); ++t) {
        for (Index s = std::max<Index>(0, t - bandwidth); s <= t; ++s) {
            spec.set(t, s, full(t, s));
        }
    }
    return spec;
}

double BandSpec::operator()(Index t, Index s) const {
    if (std::abs(t - s) > bandwidth_) {
        fail(ErrorCode::Dimension, "entry outside the specified band");
    }
    return values_(t, s);
}

void BandSpec::set(Index t, Index s, double value) {
    if (t < 0 || s < 0 || t >= dim() || s >= dim() || std::abs(t - s) > bandwidth_) {
        fail(ErrorCode::Dimension,
             "band entry (" + std::to_string(t + 1) + ", " + std::to_string(s + 1) + ") outside the band");
    }
    values_(t, s) = value;
    values_(s, t) = value;
}

Eigen::MatrixXd BandSpec::sliding_block(Index first) const {
    return values_.block(first, first, bandwidth_ + 1, bandwidth_ + 1);
}

Eigen::MatrixXd BandSpec::known() const {
    return values_;
}

FeasibilityReport check_feasibility(const BandSpec& spec) {
    FeasibilityReport report;
    const Index blocks = spec.dim() - spec.bandwidth();
    for (Index t = 0; t < blocks; ++t) {
        const Eigen::MatrixXd block = spec.sliding_block(t);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block, Eigen::EigenvaluesOnly);
        const auto& ev = eig.eigenvalues();
        const double norm = ev.cwiseAbs().maxCoeff();
        const bool finite = block.allFinite();
        if (!finite || !(ev.minCoeff() > 1e-12 * norm) || norm == 0.0) {
            report.feasible = false;
            report.first_failure = static_cast<std::size_t>(t + 1);
            return report;
        }
    }
    return report;
}

double one_step_extension(const Eigen::MatrixXd& partial) {
    const Index n = partial.rows();
    if (n < 2 || partial.cols() != n) {
        fail(ErrorCode::Dimension, "one_step_extension needs a square matrix of size >= 2");
    }
    if (n == 2) {
        // nothing couples the corner; entropy is maximized at zero
        return 0.0;
    }
    const Eigen::MatrixXd lead = partial.topLeftCorner(n - 1, n - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(lead);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::InfeasibleExtension, "leading block of the one-step extension is not positive definite");
    }
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n - 1);
    e1(0) = 1.0;
    const Eigen::VectorXd y = llt.solve(e1);
    if (!(y(0) > 0.0)) {
        fail(ErrorCode::InfeasibleExtension, "one-step extension is singular");
    }
    double acc = 0.0;
    for (Index j = 1; j < n - 1; ++j) {
        acc += partial(n - 1, j) * y(j);
    }
    return -acc / y(0);
}

CompletionResult maxent_completion(const BandSpec& spec) {
    const auto report = check_feasibility(spec);
    if (!report.feasible) {
        fail(ErrorCode::InfeasibleExtension,
             "band extension is infeasible: sliding block " + std::to_string(report.first_failure) +
                 " is not positive definite");
    }
    const Index n = spec.dim();
    Eigen::MatrixXd sigma = spec.known();
    for (Index d = spec.bandwidth() + 1; d < n; ++d) {
        for (Index s = 0; s + d < n; ++s) {
            const Index t = s + d;
            const double x = one_step_extension(sigma.block(s, s, d + 1, d + 1));
            sigma(t, s) = x;
            sigma(s, t) = x;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::InfeasibleExtension, "completed matrix is not positive definite");
    }
    CompletionResult result;
    result.entropy = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    result.matrix = std::move(sigma);
    return result;
}

}  // namespace stablekern
