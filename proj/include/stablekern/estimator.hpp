#ifndef STABLEKERN_ESTIMATOR_HPP
#define STABLEKERN_ESTIMATOR_HPP

#include "stablekern/factor.hpp"
#include "stablekern/kernel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace stablekern {

struct Dataset {
    Eigen::VectorXd u;
    Eigen::VectorXd y;
    std::optional<double> sigma2;  // known noise variance, if any
};

// Throws Dimension on length mismatch or N = 0, ParameterDomain on non-finite
// samples or a non-positive sigma2.
void validate(const Dataset& data);

// N x T regression matrix [A]_{t,k} = u(t - k) (1-based t, k), with u(tau) = 0
// for tau <= 0.
[[nodiscard]] Eigen::MatrixXd build_regressor(const Eigen::VectorXd& u, Eigen::Index N, Eigen::Index T);

// argmin ||y - A g||^2 + (sigma2 / lambda) g^T K^{-1} g, from the QR factorization
// of [A; sigma lambda^{-1/2} L^T] with L L^T = K^{-1}.
[[nodiscard]] Eigen::VectorXd rls_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                           const BandedFactor& factor, double lambda, double sigma2);
// Same with a dense kernel matrix; throws Factorization if K is not positive definite.
[[nodiscard]] Eigen::VectorXd rls_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                           const Eigen::MatrixXd& k, double lambda, double sigma2);

// log det S + y^T S^{-1} y with S = lambda A K A^T + sigma2 I.
// Throws Conditioning if S fails to factor.
[[nodiscard]] double nll_direct(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, const Eigen::MatrixXd& k,
                                double lambda, double sigma2);

// Same quantity from the QR factorization of [[A, y], [sigma lambda^{-1/2} L^T, 0]] = Q R:
//   r^2 / sigma2 + (N - T) log sigma2 + T log lambda + log det K + 2 log |det R1|.
// Throws Conditioning if R1 is singular.
[[nodiscard]] double nll_qr(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, const BandedFactor& factor,
                            double lambda, double sigma2);

// Reuses one reduced QR of [A y] across many hyperparameter trials.
class LikelihoodEvaluator {
public:
    LikelihoodEvaluator(const Eigen::MatrixXd& a, const Eigen::VectorXd& y);

    [[nodiscard]] Eigen::Index samples() const noexcept { return n_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return t_; }

    [[nodiscard]] double nll(const BandedFactor& factor, double lambda, double sigma2) const;
    [[nodiscard]] Eigen::VectorXd estimate(const BandedFactor& factor, double lambda, double sigma2) const;

private:
    [[nodiscard]] Eigen::MatrixXd stacked_r(const BandedFactor& factor, double lambda, double sigma2) const;

    Eigen::Index n_;
    Eigen::Index t_;
    Eigen::MatrixXd r0_;  // min(N, T + 1) x (T + 1)
};

// Residual variance ||y - A g_ls||^2 / (N - order) of an unregularized FIR fit.
// Rank-deficient regressors fall back to the minimum-norm solution.
// Throws Length unless N > order.
[[nodiscard]] double estimate_sigma2(const Eigen::VectorXd& u, const Eigen::VectorXd& y, Eigen::Index order);
// Default order min(T, floor(N / 3)).
[[nodiscard]] Eigen::Index default_sigma2_order(Eigen::Index N, Eigen::Index T);

struct Hyperparameters {
    double lambda = 1.0;
    KernelSpec kernel;
};

struct EstimateResult {
    Eigen::VectorXd g_hat;
    double lambda = 0.0;
    KernelSpec kernel;
    double sigma2 = 0.0;
    double nll = 0.0;
};

struct FitOptions {
    Eigen::Index dim = 50;
    // Replaces the built-in search grid when non-empty. Seeds are clamped to the box.
    std::vector<Hyperparameters> seeds;
    int max_iterations = 2000;
    int max_restarts = 8;
    double simplex_tolerance = 1e-7;
};

// Minimizes the negative log marginal likelihood over lambda and the family's
// free hyperparameters (beta; alpha for DC, DCd, HCd; gamma for SS; delta is
// fixed by the template). Box: beta, gamma in [1e-3, 1 - 1e-3], alpha in [0, 1],
// and lambda * [K]_{1,1} in [1e-8, 1e8]. Coarse grid, then Nelder-Mead in
// logit / log coordinates, restarted from the incumbent until it stops
// improving. sigma2 comes from data.sigma2 or estimate_sigma2.
[[nodiscard]] EstimateResult fit_hyperparameters(const Dataset& data, const KernelSpec& family_template,
                                                 const FitOptions& options = {});

}  // namespace stablekern

#endif
