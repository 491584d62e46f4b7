#include "stablekern/errors.hpp"
#include "stablekern/estimator.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>

namespace stablekern {

using Eigen::Index;

namespace {

constexpr double kRateLo = 1e-3;
constexpr double kRateHi = 1.0 - 1e-3;
constexpr double kAlphaLo = 0.0;
constexpr double kAlphaHi = 1.0;
constexpr double kScaleLo = 1e-8;
constexpr double kScaleHi = 1e8;
constexpr double kPenalty = 1e300;

enum class Slot { Beta, Alpha, Gamma };

struct Coordinate {
    Slot slot;
    double lo;
    double hi;
};

double logistic(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

// Beyond |z| = 30 the logistic is within 1e-13 of the box edge; clamping keeps
// the simplex from wandering along flat directions.
constexpr double kLogitLimit = 30.0;

double from_unbounded(double z, double lo, double hi) {
    return std::clamp(lo + (hi - lo) * logistic(std::clamp(z, -kLogitLimit, kLogitLimit)), lo, hi);
}

double to_unbounded(double x, double lo, double hi) {
    const double p = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    return std::clamp(std::log(p / (1.0 - p)), -kLogitLimit, kLogitLimit);
}

double& slot_of(KernelSpec& k, Slot s) {
    switch (s) {
    case Slot::Beta:
        return k.beta;
    case Slot::Alpha:
        return k.alpha;
    case Slot::Gamma:
        return k.gamma;
    }
    return k.beta;
}

std::vector<Coordinate> free_coordinates(Family f) {
    switch (f) {
    case Family::SS:
        return {{Slot::Gamma, kRateLo, kRateHi}};
    case Family::DC:
    case Family::DCd:
    case Family::HCd:
        return {{Slot::Beta, kRateLo, kRateHi}, {Slot::Alpha, kAlphaLo, kAlphaHi}};
    default:
        return {{Slot::Beta, kRateLo, kRateHi}};
    }
}

// [K]_{1,1} = ||L^{-1} e_1||^2; used to make the lambda box independent of the
// kernel's overall scale.
double leading_variance(const BandedFactor& l) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(l.dim());
    e1(0) = 1.0;
    return l.solve_lower(e1).squaredNorm();
}

// Points are (scaled lambda, kernel); the objective is kept in natural
// coordinates so the incumbent never depends on the transform round trip.
class Objective {
public:
    Objective(const LikelihoodEvaluator& eval, KernelSpec base, double sigma2)
        : eval_(eval), base_(base), coords_(free_coordinates(base.family)), sigma2_(sigma2) {}

    [[nodiscard]] std::size_t size() const { return coords_.size() + 1; }

    // z = (log scaled lambda, logit coordinates...)
    [[nodiscard]] std::vector<double> to_z(double scaled_lambda, const KernelSpec& k) const {
        std::vector<double> z{std::log(std::clamp(scaled_lambda, kScaleLo, kScaleHi))};
        KernelSpec copy = k;
        for (const auto& c : coords_) {
            z.push_back(to_unbounded(slot_of(copy, c.slot), c.lo, c.hi));
        }
        return z;
    }

    double operator()(const double* z) {
        const double scaled = std::exp(std::clamp(z[0], std::log(kScaleLo), std::log(kScaleHi)));
        KernelSpec k = base_;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            slot_of(k, coords_[i].slot) = from_unbounded(z[i + 1], coords_[i].lo, coords_[i].hi);
        }
        return evaluate_scaled(scaled, k);
    }

    // Lambda given relative to [K]_{1,1}.
    double evaluate_scaled(double scaled_lambda, const KernelSpec& k) {
        return evaluate(k, [scaled_lambda](double lead) { return scaled_lambda / lead; });
    }

    // Lambda given directly; clamped into the box if needed.
    double evaluate_natural(double lambda, const KernelSpec& k) {
        return evaluate(k, [lambda](double lead) {
            const double scaled = lambda * lead;
            return scaled < kScaleLo || scaled > kScaleHi ? std::clamp(scaled, kScaleLo, kScaleHi) / lead : lambda;
        });
    }

    [[nodiscard]] std::vector<double> best_z() const {
        const double lead = leading_variance(inverse_cholesky(best_kernel_, eval_.dim()));
        return to_z(best_lambda_ * lead, best_kernel_);
    }

    [[nodiscard]] bool has_best() const { return has_best_; }
    [[nodiscard]] double best_value() const { return best_value_; }
    [[nodiscard]] double best_lambda() const { return best_lambda_; }
    [[nodiscard]] const KernelSpec& best_kernel() const { return best_kernel_; }
    [[nodiscard]] std::size_t evaluations() const { return evaluations_; }

    [[nodiscard]] KernelSpec clamp_to_box(KernelSpec k) const {
        for (const auto& c : coords_) {
            double& v = slot_of(k, c.slot);
            v = std::clamp(v, c.lo, c.hi);
        }
        return k;
    }

    [[nodiscard]] std::vector<KernelSpec> grid_kernels() const {
        static constexpr std::array<double, 7> rates{0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.98};
        static constexpr std::array<double, 3> alphas{0.1, 0.5, 0.9};
        std::vector<KernelSpec> out;
        for (double r : rates) {
            KernelSpec k = base_;
            slot_of(k, base_.family == Family::SS ? Slot::Gamma : Slot::Beta) = r;
            if (uses_alpha(base_.family)) {
                for (double a : alphas) {
                    k.alpha = a;
                    out.push_back(k);
                }
            } else {
                out.push_back(k);
            }
        }
        return out;
    }

private:
    template <class LambdaOf>
    double evaluate(const KernelSpec& k, LambdaOf lambda_of) {
        ++evaluations_;
        double value = kPenalty;
        try {
            const BandedFactor l = inverse_cholesky(k, eval_.dim());
            const double lambda = lambda_of(leading_variance(l));
            const double v = eval_.nll(l, lambda, sigma2_);
            if (std::isfinite(v)) {
                value = v;
                if (!has_best_ || v < best_value_) {
                    has_best_ = true;
                    best_value_ = v;
                    best_lambda_ = lambda;
                    best_kernel_ = k;
                }
            }
        } catch (const Error&) {
            // outside the numerically usable region; the penalty steers the simplex away
        }
        return value;
    }

    const LikelihoodEvaluator& eval_;
    KernelSpec base_;
    std::vector<Coordinate> coords_;
    double sigma2_;
    std::size_t evaluations_ = 0;
    bool has_best_ = false;
    double best_value_ = std::numeric_limits<double>::infinity();
    double best_lambda_ = 1.0;
    KernelSpec best_kernel_;
};

double gsl_objective(const gsl_vector* v, void* params) {
    auto* obj = static_cast<Objective*>(params);
    return (*obj)(v->data);
}

void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// One simplex descent from the incumbent; the incumbent is updated through the
// objective's bookkeeping.
void simplex_pass(Objective& obj, const FitOptions& options) {
    const std::size_t n = obj.size();
    const auto z0 = obj.best_z();
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x.get(), i, z0[i]);
        gsl_vector_set(step.get(), i, i == 0 ? 1.0 : 0.5);
    }
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    if (!m) {
        fail(ErrorCode::OptimizationFailure, "could not allocate the simplex minimizer");
    }
    gsl_multimin_function fn{&gsl_objective, n, &obj};
    if (gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get()) != GSL_SUCCESS) {
        return;
    }
    // Also stop once the incumbent has stalled; the likelihood is often flat
    // towards a box edge, where the simplex would not shrink.
    const int stall_limit = 40 * static_cast<int>(n);
    double reference = obj.best_value();
    int stalled = 0;
    for (int it = 0; it < options.max_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) {
            break;
        }
        const double size = gsl_multimin_fminimizer_size(m.get());
        if (gsl_multimin_test_size(size, options.simplex_tolerance) == GSL_SUCCESS) {
            break;
        }
        if (obj.best_value() < reference - 1e-10 * std::abs(reference)) {
            reference = obj.best_value();
            stalled = 0;
        } else if (++stalled >= stall_limit) {
            break;
        }
    }
}

}  // namespace

EstimateResult fit_hyperparameters(const Dataset& data, const KernelSpec& family_template, const FitOptions& options) {
    validate(data);
    validate(family_template);
    const Index t = options.dim;
    if (t < 1) {
        fail(ErrorCode::Dimension, "impulse response length T must be >= 1");
    }
    disable_gsl_abort();

    const Index n = data.y.size();
    const double sigma2 =
        data.sigma2 ? *data.sigma2 : estimate_sigma2(data.u, data.y, default_sigma2_order(n, t));
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        fail(ErrorCode::DegenerateSystem, "estimated noise variance is not positive");
    }

    const LikelihoodEvaluator eval(build_regressor(data.u, n, t), data.y);
    Objective obj(eval, family_template, sigma2);

    if (options.seeds.empty()) {
        for (const auto& k : obj.grid_kernels()) {
            for (int e = -6; e <= 6; ++e) {
                (void)obj.evaluate_scaled(std::pow(10.0, e), k);
            }
        }
    } else {
        for (const auto& seed : options.seeds) {
            KernelSpec k = obj.clamp_to_box(seed.kernel);
            k.family = family_template.family;
            k.delta = family_template.delta;
            (void)obj.evaluate_natural(seed.lambda, k);
        }
    }
    if (!obj.has_best()) {
        std::ostringstream msg;
        msg << "no finite likelihood on any of " << obj.evaluations() << " start points for "
            << family_label(family_template) << " (N = " << n << ", T = " << t << ", sigma2 = " << sigma2 << ")";
        fail(ErrorCode::OptimizationFailure, msg.str());
    }

    for (int pass = 0; pass <= options.max_restarts; ++pass) {
        const double before = obj.best_value();
        simplex_pass(obj, options);
        if (!(obj.best_value() < before)) {
            break;
        }
    }

    EstimateResult out;
    out.kernel = obj.best_kernel();
    out.sigma2 = sigma2;
    out.nll = obj.best_value();
    out.lambda = obj.best_lambda();
    const BandedFactor l = inverse_cholesky(out.kernel, t);
    out.g_hat = eval.estimate(l, out.lambda, sigma2);
    return out;
}

}  // namespace stablekern
