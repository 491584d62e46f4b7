#ifndef STABLEKERN_SERIES_HPP
#define STABLEKERN_SERIES_HPP

#include "stablekern/toeplitz.hpp"

#include <Eigen/Dense>

#include <vector>

namespace stablekern::series {

// Relative truncation target for every tail below. Sums are accumulated in long
// double so the truncated value is accurate to double rounding.
inline constexpr double kTailTolerance = 1e-18;

// Coefficients of (1 - z)^(order - 1) (1 - alpha z); order >= 1.
[[nodiscard]] ToeplitzSeq prefilter(int order, double alpha);

// The sums below take b, the inverse sequence of prefilter(order, alpha), from
// running sums of alpha^j rather than from the expanded taps: rounding the taps
// splits the multiple root at z = 1 and b drifts at large j.

// w(tau) = sum_{j >= 0} beta^j b_j b_{j + tau} for tau = 0 .. lags - 1. Then [K]_{t,s} = kappa beta^max(t,s) w(|t-s|).
//
// Requires b_j > 0 and log-concave (true for alpha in [0, 1]); the tail after
// term j is then bounded by term_j r_j / (1 - r_j) with the non-increasing ratio
// r_j = beta (b_{j+1}/b_j) (b_{j+tau+1}/b_{j+tau}). Summation stops once that
// bound falls below kTailTolerance times the partial sum.
[[nodiscard]] std::vector<double> lag_sums(int order, double alpha, double beta, Eigen::Index lags);

// e x e matrix M (e = taps of prefilter(order, alpha) - 1) with B_T = beta^{-T} M^{-1}, where B_T is the trailing
// block of D_T in K^{-1} = kappa^{-1} P_T D_T P_T^T:
//   M = diag(beta^{1-delta}, ..., beta^0) + sum_{m >= 1} beta^m u_m u_m^T,
//   u_m[i] = sum_{l=0}^{delta-i} b_{m+delta-i-l} p_l   (i = 1 .. delta).
// M does not depend on T.
[[nodiscard]] Eigen::MatrixXd trailing_gram(int order, double alpha, double beta);

// Lower Cholesky factor of B_T and log det B_T, taken from M in long double
// without forming M^{-1}; M is badly conditioned for high orders and beta near 1.
struct TrailingFactor {
    Eigen::MatrixXd factor;
    double logdet = 0.0;
};
[[nodiscard]] TrailingFactor trailing_factor(int order, double alpha, double beta, Eigen::Index T);

}  // namespace stablekern::series

#endif
