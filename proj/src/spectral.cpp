#include "stablekern/spectral.hpp"

#include "stablekern/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stablekern {

using Eigen::Index;

double default_stationarity_tolerance(const KernelSpec& spec) {
    if (spec.family == Family::SS) {
        return 1e-10;
    }
    return detail::structure_of(spec).order > 2 ? 1e-7 : 1e-10;
}

StationaryKernel stationary_part(const KernelSpec& spec, Index T, std::optional<double> tolerance) {
    const Eigen::MatrixXd k = build_kernel(spec, T);
    const double rate = envelope_rate(spec);
    const double log_rate = std::log(rate);

    StationaryKernel out;
    out.source = spec;
    out.rate = rate;
    out.w.assign(static_cast<std::size_t>(T), 0.0);
    std::vector<double> lo(out.w.size()), hi(out.w.size());
    for (Index tau = 0; tau < T; ++tau) {
        for (Index s = 1; s + tau <= T; ++s) {
            const Index t = s + tau;
            const double v = k(t - 1, s - 1) * std::exp(-0.5 * static_cast<double>(t + s) * log_rate);
            const auto i = static_cast<std::size_t>(tau);
            if (s == 1) {
                out.w[i] = v;
                lo[i] = hi[i] = v;
            } else {
                lo[i] = std::min(lo[i], v);
                hi[i] = std::max(hi[i], v);
            }
        }
    }
    if (!(out.w[0] > 0.0)) {
        fail(ErrorCode::Decomposition, "stationary part has non-positive zero-lag value");
    }
    for (std::size_t i = 0; i < out.w.size(); ++i) {
        out.spread = std::max(out.spread, (hi[i] - lo[i]) / out.w[0]);
    }
    const double tol = tolerance.value_or(default_stationarity_tolerance(spec));
    if (!(out.spread <= tol)) {
        std::ostringstream msg;
        msg << family_label(spec) << " is not stationary after removing the envelope " << rate
            << "^((t+s)/2): relative spread " << out.spread << " exceeds " << tol;
        fail(ErrorCode::Decomposition, msg.str());
    }
    return out;
}

Index spectral_dim(const KernelSpec& spec) {
    const double inf = std::numeric_limits<double>::infinity();
    Index t = kSpectralDim;
    for (int k = 0;; ++k, t *= 2) {
        const auto w = stationary_part(spec, t, inf).w;
        if (k == 4 || std::abs(w.back()) <= 1e-17 * w.front()) {
            return t;
        }
    }
}

Psd psd(const std::vector<double>& w, Index grid, bool normalize) {
    if (grid < 2) {
        fail(ErrorCode::Dimension, "PSD grid needs at least 2 points");
    }
    if (w.empty()) {
        fail(ErrorCode::Dimension, "autocovariance sequence is empty");
    }
    Psd out;
    out.normalized = normalize;
    out.theta.resize(static_cast<std::size_t>(grid));
    out.phi.resize(static_cast<std::size_t>(grid));
    for (Index j = 0; j < grid; ++j) {
        const double theta = std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid - 1);
        double acc = 0.0;
        // smallest terms first
        for (std::size_t tau = w.size() - 1; tau >= 1; --tau) {
            acc += w[tau] * std::cos(theta * static_cast<double>(tau));
        }
        out.theta[static_cast<std::size_t>(j)] = theta;
        out.phi[static_cast<std::size_t>(j)] = w[0] + 2.0 * acc;
    }
    if (normalize) {
        const double peak = *std::max_element(out.phi.begin(), out.phi.end());
        if (!(peak > 0.0)) {
            fail(ErrorCode::Decomposition, "cannot normalize a spectrum with no positive value");
        }
        for (double& v : out.phi) {
            v /= peak;
        }
    }
    return out;
}

double low_frequency_mass(const Psd& spectrum, double cutoff) {
    const auto& x = spectrum.theta;
    if (x.size() < 2 || spectrum.phi.size() != x.size()) {
        fail(ErrorCode::Dimension, "PSD grid is malformed");
    }
    auto clipped = [&](std::size_t i) { return std::max(spectrum.phi[i], 0.0); };
    const double c = std::clamp(cutoff, x.front(), x.back());
    double below = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = clipped(i);
        const double b = clipped(i + 1);
        const double h = x[i + 1] - x[i];
        const double area = 0.5 * h * (a + b);
        total += area;
        if (x[i + 1] <= c) {
            below += area;
        } else if (x[i] < c) {
            const double f = (c - x[i]) / h;
            const double mid = a + f * (b - a);
            below += 0.5 * (c - x[i]) * (a + mid);
        }
    }
    if (!(total > 0.0)) {
        fail(ErrorCode::Decomposition, "PSD has no positive mass");
    }
    return below / total;
}

}  // namespace stablekern
