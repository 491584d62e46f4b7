#ifndef STABLEKERN_SIMULATION_HPP
#define STABLEKERN_SIMULATION_HPP

#include "stablekern/estimator.hpp"
#include "stablekern/kernel.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace stablekern {

using Rng = std::mt19937_64;

// Damped: g_t = sum_k a_k^t cos(b_k t + c_k). Undamped drops the power on a_k.
enum class ImpulseShape { Damped, Undamped };

struct TrueSystem {
    Eigen::VectorXd g;  // g(1) .. g(T)
    std::array<double, 3> a{};
    std::array<double, 3> b{};
    std::array<double, 3> c{};
};

[[nodiscard]] TrueSystem impulse_from_params(const std::array<double, 3>& a, const std::array<double, 3>& b,
                                             const std::array<double, 3>& c, Eigen::Index T,
                                             ImpulseShape shape = ImpulseShape::Damped);

// Study 1: a_k ~ U[0.8, 0.9]; study 2: a_k ~ U[0.63, 0.73]; both b_k ~ U[0.4, 0.5],
// c_k ~ U[0, pi]. Throws ParameterDomain for any other study.
[[nodiscard]] TrueSystem sample_impulse_response(int study, Eigen::Index T, Rng& rng,
                                                 ImpulseShape shape = ImpulseShape::Damped);

inline constexpr Eigen::Index kInputFilterOrder = 100;

// Unit-variance white Gaussian noise through a Hamming-windowed sinc lowpass of
// order 100 with cutoff fc * pi, rescaled to unit sample variance.
// Throws Length unless N > 100 and ParameterDomain unless 0 < fc <= 1.
[[nodiscard]] Eigen::VectorXd generate_input(Eigen::Index N, double fc, Rng& rng);

struct SimulatedOutput {
    Eigen::VectorXd y;
    Eigen::VectorXd y_clean;
    double sigma2 = 0.0;
};

// y_clean(t) = sum_k g(k) u(t - k) with zero initial conditions;
// sigma2 = sample variance (N - 1 denominator) of y_clean divided by snr.
[[nodiscard]] SimulatedOutput simulate_output(const Eigen::VectorXd& g, const Eigen::VectorXd& u, double snr,
                                              Rng& rng);

enum class AirfReference { Mean, Sum };

// 100 (1 - ||g - g_hat|| / ||g - gbar 1||), gbar the mean of g (or its sum).
[[nodiscard]] double airf(const Eigen::VectorXd& g, const Eigen::VectorXd& g_hat,
                          AirfReference reference = AirfReference::Mean);

// Independent stream for one run of a study.
[[nodiscard]] Rng run_stream(std::uint64_t seed, std::uint64_t run);

// DI, DC, TC, SS, TC2 .. TC6, DC2 .. DC6.
[[nodiscard]] std::vector<KernelSpec> default_estimators();

struct ExperimentConfig {
    int study = 1;
    int runs = 50;
    Eigen::Index N = 500;
    Eigen::Index T = 50;
    std::uint64_t seed = 1;
    std::vector<KernelSpec> estimators = default_estimators();
    double snr = 1.0;
    double band = 0.2;
    bool true_sigma2 = false;  // fit with the generating sigma2 instead of estimating it
    AirfReference reference = AirfReference::Mean;
    ImpulseShape shape = ImpulseShape::Damped;
    unsigned threads = 0;  // 0: hardware concurrency
    bool timing = false;   // record wall time per fit; zero otherwise
};

void validate(const ExperimentConfig& config);

// JSON object with any of: study, runs, N, T, seed, estimators (array of labels),
// snr, band, sigma2 ("estimate" | "true"), reference ("mean" | "sum"),
// impulse ("damped" | "undamped"), threads, timing. Missing keys keep defaults.
[[nodiscard]] ExperimentConfig parse_experiment_config(const std::string& json_text,
                                                       ExperimentConfig base = {});

struct MCRecord {
    int run = 0;
    KernelSpec estimator;
    bool ok = false;
    double airf = 0.0;
    double lambda = 0.0;
    KernelSpec fitted;
    double sigma2 = 0.0;
    double seconds = 0.0;
    std::string error;
};

struct MCResult {
    ExperimentConfig config;
    std::vector<MCRecord> records;  // run-major, estimators in config order
};

// Failures of single fits are recorded in the table. Output depends only on the
// configuration, not on the thread count.
[[nodiscard]] MCResult run_monte_carlo(const ExperimentConfig& config);

struct EstimatorSummary {
    std::string label;
    double median_airf = 0.0;  // NaN if every fit failed
    int succeeded = 0;
    int failed = 0;
};

[[nodiscard]] std::vector<EstimatorSummary> summarize(const MCResult& result);

}  // namespace stablekern

#endif
