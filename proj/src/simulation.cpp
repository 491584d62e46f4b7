#include "stablekern/simulation.hpp"

#include "stablekern/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

namespace stablekern {

using Eigen::Index;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double sample_variance(const Eigen::VectorXd& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

Eigen::VectorXd lowpass_taps(double fc) {
    const Index n = kInputFilterOrder + 1;
    const double mid = 0.5 * static_cast<double>(kInputFilterOrder);
    Eigen::VectorXd h(n);
    for (Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) - mid;
        const double sinc = x == 0.0 ? fc : std::sin(std::numbers::pi * fc * x) / (std::numbers::pi * x);
        const double window =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
        h(i) = sinc * window;
    }
    return h / h.sum();
}

}  // namespace

TrueSystem impulse_from_params(const std::array<double, 3>& a, const std::array<double, 3>& b,
                               const std::array<double, 3>& c, Index T, ImpulseShape shape) {
    if (T < 1) {
        fail(ErrorCode::Dimension, "impulse response length must be >= 1");
    }
    TrueSystem sys{Eigen::VectorXd::Zero(T), a, b, c};
    for (Index t = 1; t <= T; ++t) {
        const double td = static_cast<double>(t);
        double v = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double amp = shape == ImpulseShape::Damped ? std::pow(a[k], td) : a[k];
            v += amp * std::cos(b[k] * td + c[k]);
        }
        sys.g(t - 1) = v;
    }
    return sys;
}

TrueSystem sample_impulse_response(int study, Index T, Rng& rng, ImpulseShape shape) {
    double lo = 0.0;
    double hi = 0.0;
    if (study == 1) {
        lo = 0.8;
        hi = 0.9;
    } else if (study == 2) {
        lo = 0.63;
        hi = 0.73;
    } else {
        fail(ErrorCode::ParameterDomain, "study must be 1 or 2, got " + std::to_string(study));
    }
    std::uniform_real_distribution<double> ua(lo, hi);
    std::uniform_real_distribution<double> ub(0.4, 0.5);
    std::uniform_real_distribution<double> uc(0.0, std::numbers::pi);
    std::array<double, 3> a{}, b{}, c{};
    for (std::size_t k = 0; k < 3; ++k) {
        a[k] = ua(rng);
        b[k] = ub(rng);
        c[k] = uc(rng);
    }
    return impulse_from_params(a, b, c, T, shape);
}

Eigen::VectorXd generate_input(Index N, double fc, Rng& rng) {
    if (!(fc > 0.0 && fc <= 1.0)) {
        fail(ErrorCode::ParameterDomain, "input band edge must satisfy 0 < fc <= 1");
    }
    if (N <= kInputFilterOrder) {
        fail(ErrorCode::Length, "input length must exceed the filter order " + std::to_string(kInputFilterOrder));
    }
    const Eigen::VectorXd h = lowpass_taps(fc);
    const Index taps = h.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd e(N + taps - 1);
    for (Index i = 0; i < e.size(); ++i) {
        e(i) = normal(rng);
    }
    Eigen::VectorXd u(N);
    for (Index i = 0; i < N; ++i) {
        // valid part only: every output sees a full filter window
        u(i) = h.reverse().dot(e.segment(i, taps));
    }
    const double var = sample_variance(u);
    if (!(var > 0.0)) {
        fail(ErrorCode::DegenerateSystem, "generated input has zero variance");
    }
    return u / std::sqrt(var);
}

SimulatedOutput simulate_output(const Eigen::VectorXd& g, const Eigen::VectorXd& u, double snr, Rng& rng) {
    if (!(snr > 0.0)) {
        fail(ErrorCode::ParameterDomain, "snr must be positive");
    }
    const Index n = u.size();
    SimulatedOutput out;
    out.y_clean = build_regressor(u, n, g.size()) * g;
    const double var = sample_variance(out.y_clean);
    if (!(var > 0.0)) {
        fail(ErrorCode::DegenerateSystem, "noise-free output has zero variance");
    }
    out.sigma2 = var / snr;
    std::normal_distribution<double> normal(0.0, std::sqrt(out.sigma2));
    out.y = out.y_clean;
    for (Index i = 0; i < n; ++i) {
        out.y(i) += normal(rng);
    }
    return out;
}

double airf(const Eigen::VectorXd& g, const Eigen::VectorXd& g_hat, AirfReference reference) {
    if (g.size() != g_hat.size() || g.size() == 0) {
        fail(ErrorCode::Dimension, "AIRF needs equal, non-zero lengths");
    }
    const double ref = reference == AirfReference::Mean ? g.mean() : g.sum();
    const double denom = (g.array() - ref).matrix().norm();
    if (!(denom > 0.0)) {
        fail(ErrorCode::DegenerateReference, "AIRF reference is degenerate: g equals its reference level");
    }
    return 100.0 * (1.0 - (g - g_hat).norm() / denom);
}

Rng run_stream(std::uint64_t seed, std::uint64_t run) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(run)));
}

std::vector<KernelSpec> default_estimators() {
    std::vector<KernelSpec> out;
    for (const char* label : {"DI", "DC", "TC", "SS"}) {
        out.push_back(spec_from_label(label));
    }
    for (int d = 2; d <= 6; ++d) {
        out.push_back(spec_from_label("TC" + std::to_string(d)));
    }
    for (int d = 2; d <= 6; ++d) {
        out.push_back(spec_from_label("DC" + std::to_string(d)));
    }
    return out;
}

void validate(const ExperimentConfig& config) {
    if (config.study != 1 && config.study != 2) {
        fail(ErrorCode::ParameterDomain, "study must be 1 or 2");
    }
    if (config.runs < 1) {
        fail(ErrorCode::ParameterDomain, "runs must be >= 1");
    }
    if (config.T < 1) {
        fail(ErrorCode::Dimension, "T must be >= 1");
    }
    if (config.N <= kInputFilterOrder) {
        fail(ErrorCode::Length, "N must exceed the input filter order " + std::to_string(kInputFilterOrder));
    }
    if (!(config.snr > 0.0) || !std::isfinite(config.snr)) {
        fail(ErrorCode::ParameterDomain, "snr must be positive");
    }
    if (!(config.band > 0.0 && config.band <= 1.0)) {
        fail(ErrorCode::ParameterDomain, "band must satisfy 0 < band <= 1");
    }
    if (config.estimators.empty()) {
        fail(ErrorCode::ParameterDomain, "at least one estimator is required");
    }
}

ExperimentConfig parse_experiment_config(const std::string& json_text, ExperimentConfig base) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("experiment config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        fail(ErrorCode::Parse, "experiment config must be a JSON object");
    }
    static const std::vector<std::string> known{"study", "runs", "N",         "T",       "seed",    "estimators", "snr",
                                                "band",  "sigma2", "reference", "impulse", "threads", "timing"};
    try {
        for (const auto& [key, value] : j.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                fail(ErrorCode::Parse, "unknown experiment config key '" + key + "'");
            }
        }
        if (j.contains("study")) base.study = j.at("study").get<int>();
        if (j.contains("runs")) base.runs = j.at("runs").get<int>();
        if (j.contains("N")) base.N = j.at("N").get<Index>();
        if (j.contains("T")) base.T = j.at("T").get<Index>();
        if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("snr")) base.snr = j.at("snr").get<double>();
        if (j.contains("band")) base.band = j.at("band").get<double>();
        if (j.contains("threads")) base.threads = j.at("threads").get<unsigned>();
        if (j.contains("timing")) base.timing = j.at("timing").get<bool>();
        if (j.contains("estimators")) {
            base.estimators.clear();
            for (const auto& label : j.at("estimators")) {
                base.estimators.push_back(spec_from_label(label.get<std::string>()));
            }
        }
        if (j.contains("sigma2")) {
            const auto mode = j.at("sigma2").get<std::string>();
            if (mode != "estimate" && mode != "true") {
                fail(ErrorCode::Parse, "sigma2 must be \"estimate\" or \"true\"");
            }
            base.true_sigma2 = mode == "true";
        }
        if (j.contains("reference")) {
            const auto mode = j.at("reference").get<std::string>();
            if (mode != "mean" && mode != "sum") {
                fail(ErrorCode::Parse, "reference must be \"mean\" or \"sum\"");
            }
            base.reference = mode == "mean" ? AirfReference::Mean : AirfReference::Sum;
        }
        if (j.contains("impulse")) {
            const auto mode = j.at("impulse").get<std::string>();
            if (mode != "damped" && mode != "undamped") {
                fail(ErrorCode::Parse, "impulse must be \"damped\" or \"undamped\"");
            }
            base.shape = mode == "damped" ? ImpulseShape::Damped : ImpulseShape::Undamped;
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("experiment config has a wrongly typed value: ") + e.what());
    }
    return base;
}

namespace {

void run_one(const ExperimentConfig& config, int run, MCRecord* records) {
    Rng rng = run_stream(config.seed, static_cast<std::uint64_t>(run));
    const std::size_t count = config.estimators.size();
    std::string setup_error;
    TrueSystem sys;
    Dataset data;
    try {
        sys = sample_impulse_response(config.study, config.T, rng, config.shape);
        data.u = generate_input(config.N, config.band, rng);
        auto out = simulate_output(sys.g, data.u, config.snr, rng);
        data.y = std::move(out.y);
        if (config.true_sigma2) {
            data.sigma2 = out.sigma2;
        }
    } catch (const Error& e) {
        setup_error = e.what();
    }
    FitOptions options;
    options.dim = config.T;
    for (std::size_t i = 0; i < count; ++i) {
        MCRecord& rec = records[i];
        rec.run = run;
        rec.estimator = config.estimators[i];
        if (!setup_error.empty()) {
            rec.error = setup_error;
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        try {
            const EstimateResult fit = fit_hyperparameters(data, rec.estimator, options);
            rec.airf = airf(sys.g, fit.g_hat, config.reference);
            rec.lambda = fit.lambda;
            rec.fitted = fit.kernel;
            rec.sigma2 = fit.sigma2;
            rec.ok = true;
        } catch (const Error& e) {
            rec.error = e.what();
        }
        if (config.timing) {
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    }
}

}  // namespace

MCResult run_monte_carlo(const ExperimentConfig& config) {
    validate(config);
    for (const auto& spec : config.estimators) {
        validate(spec);
    }
    MCResult result;
    result.config = config;
    const std::size_t per_run = config.estimators.size();
    result.records.resize(static_cast<std::size_t>(config.runs) * per_run);

    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = std::min<unsigned>(threads, static_cast<unsigned>(config.runs));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int run = next++; run < config.runs; run = next++) {
            run_one(config, run, result.records.data() + static_cast<std::size_t>(run) * per_run);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
    }
    return result;
}

std::vector<EstimatorSummary> summarize(const MCResult& result) {
    const auto& est = result.config.estimators;
    std::vector<EstimatorSummary> out;
    for (std::size_t i = 0; i < est.size(); ++i) {
        EstimatorSummary s;
        s.label = family_label(est[i]);
        std::vector<double> values;
        for (std::size_t r = i; r < result.records.size(); r += est.size()) {
            const auto& rec = result.records[r];
            if (rec.ok) {
                values.push_back(rec.airf);
            } else {
                ++s.failed;
            }
        }
        s.succeeded = static_cast<int>(values.size());
        if (values.empty()) {
            s.median_airf = std::numeric_limits<double>::quiet_NaN();
        } else {
            std::sort(values.begin(), values.end());
            const std::size_t m = values.size() / 2;
            s.median_airf = values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace stablekern
