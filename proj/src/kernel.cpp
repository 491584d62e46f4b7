#include "stablekern/kernel.hpp"

#include "stablekern/errors.hpp"
#include "stablekern/series.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace stablekern {

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::optional<double> parse_double(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return v;
}

std::optional<int> parse_int(std::string_view text) {
    int v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return v;
}

[[noreturn]] void out_of_range(const std::string& name, const std::string& range, double value) {
    fail(ErrorCode::ParameterDomain, name + " must lie in " + range + ", got " + format_number(value));
}

// Closed-form entries of the order <= 2 correlated kernels, tau = |t - s|, top = max(t, s).
double correlated_entry(int order, double alpha, double beta, int tau, int top) {
    if (order == 0) {
        return tau == 0 ? std::pow(beta, top) : 0.0;
    }
    if (order == 1) {
        return std::pow(alpha, tau) * std::pow(beta, top);
    }
    // order 2
    if (alpha == 1.0) {
        return 2.0 * std::pow(beta, top + 1) + (1.0 - beta) * (1.0 + tau) * std::pow(beta, top);
    }
    if (alpha > 1.0 - 1e-8) {
        // (1 - alpha) divided out of the numerator:
        //   sum_{i=0}^{tau} alpha^i - beta g(tau),  g(0) = -alpha, g(1) = 0, g(tau) = sum_{i=2}^{tau} alpha^i
        double head = 0.0;
        double power = 1.0;
        for (int i = 0; i <= tau; ++i) {
            head += power;
            power *= alpha;
        }
        double g = 0.0;
        if (tau == 0) {
            g = -alpha;
        } else {
            power = alpha * alpha;
            for (int i = 2; i <= tau; ++i) {
                g += power;
                power *= alpha;
            }
        }
        return std::pow(beta, top) * (head - beta * g);
    }
    const double bt = std::pow(beta, top);
    return (bt * (1.0 - (1.0 - beta) * std::pow(alpha, tau + 1)) - alpha * alpha * std::pow(beta, top + 1)) /
           (1.0 - alpha);
}

}  // namespace

bool uses_alpha(Family f) noexcept {
    return f == Family::DC || f == Family::DCd || f == Family::HCd;
}

bool uses_delta(Family f) noexcept {
    return f == Family::TCd || f == Family::DCd || f == Family::HFd || f == Family::HCd;
}

std::string family_label(const KernelSpec& spec) {
    switch (spec.family) {
        case Family::DI: return "DI";
        case Family::TC: return "TC";
        case Family::DC: return "DC";
        case Family::SS: return "SS";
        case Family::TCd: return "TC" + std::to_string(spec.delta);
        case Family::DCd: return "DC" + std::to_string(spec.delta);
        case Family::HFd: return "HF" + std::to_string(spec.delta);
        case Family::HCd: return "HC" + std::to_string(spec.delta);
    }
    return "?";
}

KernelSpec spec_from_label(std::string_view label) {
    KernelSpec spec;
    if (label == "DI") { spec.family = Family::DI; return spec; }
    if (label == "TC") { spec.family = Family::TC; return spec; }
    if (label == "DC") { spec.family = Family::DC; return spec; }
    if (label == "SS") { spec.family = Family::SS; return spec; }
    if (label == "HF") { spec.family = Family::HFd; spec.delta = 1; return spec; }
    if (label.size() < 3) {
        fail(ErrorCode::Parse, "unknown kernel family '" + std::string(label) + "'");
    }
    const std::string_view head = label.substr(0, 2);
    const std::string_view tail = label.substr(2);
    if (head == "TC") {
        spec.family = Family::TCd;
    } else if (head == "DC") {
        spec.family = Family::DCd;
    } else if (head == "HF") {
        spec.family = Family::HFd;
    } else if (head == "HC") {
        spec.family = Family::HCd;
    } else {
        fail(ErrorCode::Parse, "unknown kernel family '" + std::string(label) + "'");
    }
    if (tail == "d") {
        return spec;
    }
    const auto order = parse_int(tail);
    if (!order) {
        fail(ErrorCode::Parse, "unknown kernel family '" + std::string(label) + "'");
    }
    spec.delta = *order;
    return spec;
}

std::string format_spec(const KernelSpec& spec) {
    std::string out = "family=" + family_label(spec);
    if (spec.family == Family::SS) {
        out += " gamma=" + format_number(spec.gamma);
        return out;
    }
    out += " beta=" + format_number(spec.beta);
    if (uses_alpha(spec.family)) {
        out += " alpha=" + format_number(spec.alpha);
    }
    return out;
}

KernelSpec parse_spec(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string token;
    std::optional<KernelSpec> spec;
    bool bare_order = false;
    std::optional<double> beta;
    std::optional<double> alpha;
    std::optional<double> gamma;
    std::optional<int> delta;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            fail(ErrorCode::Parse, "expected key=value, got '" + token + "'");
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "family") {
            spec = spec_from_label(value);
            bare_order = uses_delta(spec->family) && value.back() == 'd';
        } else if (key == "delta") {
            delta = parse_int(value);
            if (!delta) {
                fail(ErrorCode::Parse, "delta is not an integer: '" + value + "'");
            }
        } else {
            const auto v = parse_double(value);
            if (!v) {
                fail(ErrorCode::Parse, key + " is not a number: '" + value + "'");
            }
            if (key == "beta") {
                beta = v;
            } else if (key == "alpha") {
                alpha = v;
            } else if (key == "gamma") {
                gamma = v;
            } else {
                fail(ErrorCode::Parse, "unknown key '" + key + "'");
            }
        }
    }
    if (!spec) {
        fail(ErrorCode::Parse, "missing family key");
    }
    if (delta) {
        if (!uses_delta(spec->family)) {
            fail(ErrorCode::Parse, "delta given for family without an order");
        }
        if (!bare_order && spec->delta != *delta) {
            fail(ErrorCode::Parse, "delta conflicts with the order in the family label");
        }
        spec->delta = *delta;
    }
    if (beta) spec->beta = *beta;
    if (alpha) spec->alpha = *alpha;
    if (gamma) spec->gamma = *gamma;
    return *spec;
}

void validate(const KernelSpec& spec) {
    if (spec.family == Family::SS) {
        if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) {
            out_of_range("gamma", "(0, 1)", spec.gamma);
        }
        return;
    }
    if (!(spec.beta > 0.0 && spec.beta < 1.0)) {
        out_of_range("beta", "(0, 1)", spec.beta);
    }
    if (spec.family == Family::DC) {
        const double bound = 1.0 / std::sqrt(spec.beta);
        if (!(spec.alpha > -bound && spec.alpha < bound)) {
            out_of_range("alpha", "(-beta^(-1/2), beta^(-1/2))", spec.alpha);
        }
    } else if (uses_alpha(spec.family)) {
        if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
            out_of_range("alpha", "[0, 1]", spec.alpha);
        }
    }
    if (uses_delta(spec.family) && spec.delta < 1) {
        fail(ErrorCode::ParameterDomain, "delta must be a positive integer, got " + std::to_string(spec.delta));
    }
}

int inverse_bandwidth(const KernelSpec& spec) {
    switch (spec.family) {
        case Family::DI: return 0;
        case Family::TC:
        case Family::DC: return 1;
        case Family::SS: return -1;
        default: return spec.delta;
    }
}

double envelope_rate(const KernelSpec& spec) {
    if (spec.family == Family::SS) {
        return spec.gamma * spec.gamma * spec.gamma;
    }
    return spec.beta;
}

namespace detail {

Structure structure_of(const KernelSpec& spec) {
    Structure s;
    s.beta = spec.beta;
    switch (spec.family) {
        case Family::DI: s.order = 0; break;
        case Family::TC: s.order = 1; break;
        case Family::DC: s.order = 1; s.alpha = spec.alpha; break;
        case Family::SS: s.spline = true; break;
        case Family::TCd: s.order = spec.delta; break;
        case Family::DCd: s.order = spec.delta; s.alpha = spec.alpha; break;
        case Family::HFd: s.order = spec.delta; s.flipped = true; break;
        case Family::HCd: s.order = spec.delta; s.alpha = spec.alpha; s.flipped = true; break;
    }
    return s;
}

}  // namespace detail

double normalization_kappa(const KernelSpec& spec) {
    validate(spec);
    const auto s = detail::structure_of(spec);
    if (s.spline || s.order == 0 || s.order > 2) {
        return 1.0;
    }
    const double a = s.alpha;
    const double b = s.beta;
    if (s.order == 1) {
        return 1.0 - a * a * b;
    }
    return (1.0 - b) * (1.0 - a * b) * (1.0 - a * a * b);
}

Eigen::MatrixXd build_kernel(const KernelSpec& spec, Eigen::Index T) {
    validate(spec);
    if (T < 1) {
        fail(ErrorCode::Dimension, "kernel dimension T must be >= 1");
    }
    Eigen::MatrixXd k(T, T);
    const auto s = detail::structure_of(spec);

    if (s.spline) {
        const double g = spec.gamma;
        for (Eigen::Index t = 1; t <= T; ++t) {
            for (Eigen::Index u = 1; u <= t; ++u) {
                const double top = static_cast<double>(t);
                const double v = std::pow(g, static_cast<double>(t + u)) * std::pow(g, top) / 2.0 -
                                 std::pow(g, 3.0 * top) / 6.0;
                k(t - 1, u - 1) = v;
                k(u - 1, t - 1) = v;
            }
        }
        return k;
    }

    std::vector<double> lag;
    double kappa = 1.0;
    if (s.order > 2) {
        lag = series::lag_sums(s.order, s.alpha, s.beta, T);
        kappa = normalization_kappa(spec);
    }
    for (Eigen::Index t = 1; t <= T; ++t) {
        for (Eigen::Index u = 1; u <= t; ++u) {
            const int tau = static_cast<int>(t - u);
            const int top = static_cast<int>(t);
            double v = s.order > 2
                           ? kappa * std::pow(s.beta, top) * lag[static_cast<std::size_t>(tau)]
                           : correlated_entry(s.order, s.alpha, s.beta, tau, top);
            if (s.flipped && (tau % 2 == 1)) {
                v = -v;
            }
            k(t - 1, u - 1) = v;
            k(u - 1, t - 1) = v;
        }
    }
    return k;
}

}  // namespace stablekern
