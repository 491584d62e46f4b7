#ifndef STABLEKERN_SPECTRAL_HPP
#define STABLEKERN_SPECTRAL_HPP

#include "stablekern/kernel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace stablekern {

inline constexpr Eigen::Index kSpectralDim = 200;

// K = beta^((t+s)/2) W with W Toeplitz; w[tau] is the lag-tau entry of W.
struct StationaryKernel {
    std::vector<double> w;
    KernelSpec source;
    double rate = 0.0;    // envelope rate beta (gamma^3 for SS)
    double spread = 0.0;  // max over lags of (max - min) / w[0] along each diagonal
};

// Default stationarity tolerance: 1e-10 for closed-form families, 1e-7 for
// series-built ones (order > 2).
[[nodiscard]] double default_stationarity_tolerance(const KernelSpec& spec);

// Throws Decomposition when the scaled diagonals are not constant to
// `tolerance` (relative to w[0]).
[[nodiscard]] StationaryKernel stationary_part(const KernelSpec& spec, Eigen::Index T = kSpectralDim,
                                               std::optional<double> tolerance = std::nullopt);

// Smallest T = kSpectralDim * 2^k (k <= 4) at which the last lag of the
// stationary part is below 1e-17 w[0], so the truncated cosine series is
// accurate. High orders decay like beta^(tau/2) tau^(delta-1) and need more
// than 200 lags.
[[nodiscard]] Eigen::Index spectral_dim(const KernelSpec& spec);

struct Psd {
    std::vector<double> theta;
    std::vector<double> phi;
    bool normalized = false;
};

// phi(theta_j) = w0 + 2 sum_{tau >= 1} w[tau] cos(theta_j tau), theta_j = j pi / (M - 1).
// Truncation can leave small negative values; they are kept.
[[nodiscard]] Psd psd(const std::vector<double>& w, Eigen::Index grid, bool normalize = false);

// Fraction of the area of max(phi, 0) on [0, cutoff] relative to [0, pi], using
// the piecewise-linear interpolant of the grid values.
[[nodiscard]] double low_frequency_mass(const Psd& spectrum, double cutoff);

}  // namespace stablekern

#endif
