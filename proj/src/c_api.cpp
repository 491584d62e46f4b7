#include "stablekern/stablekern.h"

#include "stablekern/csv.hpp"
#include "stablekern/errors.hpp"
#include "stablekern/estimator.hpp"
#include "stablekern/factor.hpp"
#include "stablekern/kernel.hpp"
#include "stablekern/maxent.hpp"
#include "stablekern/simulation.hpp"
#include "stablekern/spectral.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <new>
#include <sstream>
#include <string>

using namespace stablekern;

struct sk_spec {
    KernelSpec value;
};
struct sk_matrix {
    Eigen::MatrixXd value;
};
struct sk_bands {
    BandSpec value;
};
struct sk_dataset {
    Dataset value;
};
struct sk_estimate {
    EstimateResult value;
};
struct sk_mc_result {
    MCResult value;
};
struct sk_psd {
    Psd value;
};

namespace {

thread_local std::string last_error;

sk_status to_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParameterDomain:
        return SK_ERR_PARAMETER_DOMAIN;
    case ErrorCode::Dimension:
        return SK_ERR_DIMENSION;
    case ErrorCode::SingularOperator:
        return SK_ERR_SINGULAR_OPERATOR;
    case ErrorCode::Factorization:
        return SK_ERR_FACTORIZATION;
    case ErrorCode::Conditioning:
        return SK_ERR_CONDITIONING;
    case ErrorCode::InfeasibleExtension:
        return SK_ERR_INFEASIBLE_EXTENSION;
    case ErrorCode::Decomposition:
        return SK_ERR_DECOMPOSITION;
    case ErrorCode::OptimizationFailure:
        return SK_ERR_OPTIMIZATION_FAILURE;
    case ErrorCode::DegenerateSystem:
        return SK_ERR_DEGENERATE_SYSTEM;
    case ErrorCode::DegenerateReference:
        return SK_ERR_DEGENERATE_REFERENCE;
    case ErrorCode::Length:
        return SK_ERR_LENGTH;
    case ErrorCode::Io:
        return SK_ERR_IO;
    case ErrorCode::Parse:
        return SK_ERR_PARSE;
    }
    return SK_ERR_INTERNAL;
}

struct InvalidArgument {
    std::string what;
};

template <class F>
sk_status guarded(F&& body) noexcept {
    try {
        body();
        last_error.clear();
        return SK_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const InvalidArgument& e) {
        last_error = e.what;
        return SK_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return SK_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return SK_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return SK_ERR_INTERNAL;
    }
}

template <class T>
void require(const T* p, const char* name) {
    if (p == nullptr) {
        throw InvalidArgument{std::string(name) + " must not be NULL"};
    }
}

Eigen::Index to_index(size_t n, const char* name) {
    if (n > static_cast<size_t>(std::numeric_limits<int>::max())) {
        throw InvalidArgument{std::string(name) + " is too large"};
    }
    return static_cast<Eigen::Index>(n);
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class Writer>
void write_to(const char* path, Writer&& writer) {
    if (path == nullptr) {
        writer(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::Io, std::string("cannot open '") + path + "' for writing");
    }
    writer(out);
    out.flush();
    if (!out) {
        fail(ErrorCode::Io, std::string("failed writing '") + path + "'");
    }
}

std::ifstream open_input(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, std::string("cannot open '") + path + "'");
    }
    return in;
}

}  // namespace

extern "C" {

const char* sk_status_name(sk_status status) {
    switch (status) {
    case SK_OK:
        return "ok";
    case SK_ERR_PARAMETER_DOMAIN:
        return "parameter-domain";
    case SK_ERR_DIMENSION:
        return "dimension";
    case SK_ERR_SINGULAR_OPERATOR:
        return "singular-operator";
    case SK_ERR_FACTORIZATION:
        return "factorization";
    case SK_ERR_CONDITIONING:
        return "conditioning";
    case SK_ERR_INFEASIBLE_EXTENSION:
        return "infeasible-extension";
    case SK_ERR_DECOMPOSITION:
        return "decomposition";
    case SK_ERR_OPTIMIZATION_FAILURE:
        return "optimization-failure";
    case SK_ERR_DEGENERATE_SYSTEM:
        return "degenerate-system";
    case SK_ERR_DEGENERATE_REFERENCE:
        return "degenerate-reference";
    case SK_ERR_LENGTH:
        return "length";
    case SK_ERR_IO:
        return "io";
    case SK_ERR_PARSE:
        return "parse";
    case SK_ERR_INVALID_ARGUMENT:
        return "invalid-argument";
    case SK_ERR_INTERNAL:
        return "internal";
    }
    return "unknown";
}

const char* sk_last_error_message(void) {
    return last_error.c_str();
}

void sk_string_free(char* s) {
    std::free(s);
}

sk_status sk_spec_parse(const char* text, sk_spec** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        KernelSpec spec = parse_spec(text);
        *out = new sk_spec{spec};
    });
}

sk_status sk_spec_from_label(const char* label, double beta, double alpha, int delta, double gamma, sk_spec** out) {
    return guarded([&] {
        require(label, "label");
        require(out, "out");
        KernelSpec spec = spec_from_label(label);
        if (!std::isnan(beta)) spec.beta = beta;
        if (!std::isnan(alpha)) spec.alpha = alpha;
        if (!std::isnan(gamma)) spec.gamma = gamma;
        if (delta > 0) {
            const std::string text(label);
            if (!uses_delta(spec.family)) {
                fail(ErrorCode::Parse, "delta given for family without an order");
            }
            if (text.back() != 'd' && spec.delta != delta) {
                fail(ErrorCode::Parse, "delta conflicts with the order in the family label");
            }
            spec.delta = delta;
        }
        validate(spec);
        *out = new sk_spec{spec};
    });
}

sk_status sk_spec_to_string(const sk_spec* spec, char** out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        *out = duplicate(format_spec(spec->value));
    });
}

sk_status sk_spec_label(const sk_spec* spec, char** out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        *out = duplicate(family_label(spec->value));
    });
}

void sk_spec_free(sk_spec* spec) {
    delete spec;
}

sk_status sk_kernel_build(const sk_spec* spec, size_t dim, sk_matrix** out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        auto k = build_kernel(spec->value, to_index(dim, "dim"));
        *out = new sk_matrix{std::move(k)};
    });
}

sk_status sk_kernel_inverse(const sk_spec* spec, size_t dim, sk_matrix** out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        auto k = build_inverse(spec->value, to_index(dim, "dim"));
        *out = new sk_matrix{std::move(k)};
    });
}

sk_status sk_kernel_inverse_cholesky(const sk_spec* spec, size_t dim, sk_matrix** factor, double* logdet_k) {
    return guarded([&] {
        require(spec, "spec");
        const BandedFactor l = inverse_cholesky(spec->value, to_index(dim, "dim"));
        if (logdet_k != nullptr) {
            *logdet_k = l.logdet_K;
        }
        if (factor != nullptr) {
            *factor = new sk_matrix{l.dense()};
        }
    });
}

sk_status sk_kernel_logdet(const sk_spec* spec, size_t dim, double* out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        *out = inverse_cholesky(spec->value, to_index(dim, "dim")).logdet_K;
    });
}

sk_status sk_kernel_kappa(const sk_spec* spec, double* out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        validate(spec->value);
        *out = normalization_kappa(spec->value);
    });
}

sk_status sk_kernel_inverse_bandwidth(const sk_spec* spec, int* out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        validate(spec->value);
        *out = inverse_bandwidth(spec->value);
    });
}

sk_status sk_matrix_from_rows(const double* values, size_t rows, size_t cols, sk_matrix** out) {
    return guarded([&] {
        require(values, "values");
        require(out, "out");
        Eigen::MatrixXd m(to_index(rows, "rows"), to_index(cols, "cols"));
        for (size_t i = 0; i < rows; ++i) {
            for (size_t j = 0; j < cols; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
            }
        }
        *out = new sk_matrix{std::move(m)};
    });
}

size_t sk_matrix_rows(const sk_matrix* m) {
    return m ? static_cast<size_t>(m->value.rows()) : 0;
}

size_t sk_matrix_cols(const sk_matrix* m) {
    return m ? static_cast<size_t>(m->value.cols()) : 0;
}

sk_status sk_matrix_get(const sk_matrix* m, size_t row, size_t col, double* out) {
    return guarded([&] {
        require(m, "matrix");
        require(out, "out");
        if (row < 1 || col < 1 || row > sk_matrix_rows(m) || col > sk_matrix_cols(m)) {
            fail(ErrorCode::Dimension, "matrix index out of range");
        }
        *out = m->value(static_cast<Eigen::Index>(row - 1), static_cast<Eigen::Index>(col - 1));
    });
}

sk_status sk_matrix_copy(const sk_matrix* m, double* buf, size_t len) {
    return guarded([&] {
        require(m, "matrix");
        require(buf, "buf");
        const size_t rows = sk_matrix_rows(m);
        const size_t cols = sk_matrix_cols(m);
        if (len < rows * cols) {
            fail(ErrorCode::Dimension, "buffer is smaller than rows * cols");
        }
        for (size_t i = 0; i < rows; ++i) {
            for (size_t j = 0; j < cols; ++j) {
                buf[i * cols + j] = m->value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    });
}

sk_status sk_matrix_write_csv(const sk_matrix* m, const char* path) {
    return guarded([&] {
        require(m, "matrix");
        write_to(path, [&](std::ostream& os) { io::write_matrix_csv(os, m->value); });
    });
}

sk_status sk_matrix_max_abs_diff(const sk_matrix* a, const sk_matrix* b, double* out) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols()) {
            fail(ErrorCode::Dimension, "matrices differ in shape");
        }
        *out = a->value.size() == 0 ? 0.0 : (a->value - b->value).cwiseAbs().maxCoeff();
    });
}

void sk_matrix_free(sk_matrix* m) {
    delete m;
}

sk_status sk_bands_from_matrix(const sk_matrix* m, size_t bandwidth, sk_bands** out) {
    return guarded([&] {
        require(m, "matrix");
        require(out, "out");
        auto b = BandSpec::from_matrix(m->value, to_index(bandwidth, "bandwidth"));
        *out = new sk_bands{std::move(b)};
    });
}

sk_status sk_bands_read_csv(const char* path, sk_bands** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto in = open_input(path);
        auto b = io::read_bands_csv(in);
        *out = new sk_bands{std::move(b)};
    });
}

sk_status sk_bands_write_csv(const sk_bands* bands, const char* path) {
    return guarded([&] {
        require(bands, "bands");
        write_to(path, [&](std::ostream& os) { io::write_bands_csv(os, bands->value); });
    });
}

size_t sk_bands_dim(const sk_bands* bands) {
    return bands ? static_cast<size_t>(bands->value.dim()) : 0;
}

size_t sk_bands_bandwidth(const sk_bands* bands) {
    return bands ? static_cast<size_t>(bands->value.bandwidth()) : 0;
}

sk_status sk_bands_perturb(sk_bands* bands, size_t t, size_t s, double delta) {
    return guarded([&] {
        require(bands, "bands");
        if (t < 1 || s < 1) {
            fail(ErrorCode::Dimension, "band indices are 1-based");
        }
        const auto ti = to_index(t - 1, "t");
        const auto si = to_index(s - 1, "s");
        if (ti >= bands->value.dim() || si >= bands->value.dim() ||
            std::abs(ti - si) > bands->value.bandwidth()) {
            fail(ErrorCode::Dimension, "entry (" + std::to_string(t) + ", " + std::to_string(s) +
                                           ") lies outside the band");
        }
        bands->value.set(ti, si, bands->value(ti, si) + delta);
    });
}

sk_status sk_bands_check_feasibility(const sk_bands* bands, int* feasible, size_t* first_failure) {
    return guarded([&] {
        require(bands, "bands");
        const auto r = check_feasibility(bands->value);
        if (feasible != nullptr) {
            *feasible = r.feasible ? 1 : 0;
        }
        if (first_failure != nullptr) {
            *first_failure = r.first_failure;
        }
    });
}

sk_status sk_maxent_complete(const sk_bands* bands, sk_matrix** out, double* entropy) {
    return guarded([&] {
        require(bands, "bands");
        require(out, "out");
        auto r = maxent_completion(bands->value);
        if (entropy != nullptr) {
            *entropy = r.entropy;
        }
        *out = new sk_matrix{std::move(r.matrix)};
    });
}

void sk_bands_free(sk_bands* bands) {
    delete bands;
}

sk_status sk_dataset_read_csv(const char* path, sk_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto in = open_input(path);
        auto d = io::read_dataset_csv(in);
        validate(d);
        *out = new sk_dataset{std::move(d)};
    });
}

sk_status sk_dataset_from_arrays(const double* u, const double* y, size_t n, sk_dataset** out) {
    return guarded([&] {
        require(u, "u");
        require(y, "y");
        require(out, "out");
        const auto len = to_index(n, "n");
        Dataset d;
        d.u = Eigen::Map<const Eigen::VectorXd>(u, len);
        d.y = Eigen::Map<const Eigen::VectorXd>(y, len);
        validate(d);
        *out = new sk_dataset{std::move(d)};
    });
}

sk_status sk_dataset_set_sigma2(sk_dataset* data, double sigma2) {
    return guarded([&] {
        require(data, "data");
        if (std::isnan(sigma2)) {
            data->value.sigma2.reset();
            return;
        }
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
            fail(ErrorCode::ParameterDomain, "sigma2 must be positive and finite");
        }
        data->value.sigma2 = sigma2;
    });
}

size_t sk_dataset_size(const sk_dataset* data) {
    return data ? static_cast<size_t>(data->value.y.size()) : 0;
}

void sk_dataset_free(sk_dataset* data) {
    delete data;
}

sk_status sk_fit(const sk_dataset* data, const sk_spec* family_template, size_t dim, sk_estimate** out) {
    return guarded([&] {
        require(data, "data");
        require(family_template, "family_template");
        require(out, "out");
        FitOptions options;
        options.dim = to_index(dim, "dim");
        auto r = fit_hyperparameters(data->value, family_template->value, options);
        *out = new sk_estimate{std::move(r)};
    });
}

sk_status sk_estimate_to_json(const sk_estimate* est, char** out) {
    return guarded([&] {
        require(est, "estimate");
        require(out, "out");
        *out = duplicate(io::estimate_to_json(est->value));
    });
}

sk_status sk_estimate_spec(const sk_estimate* est, sk_spec** out) {
    return guarded([&] {
        require(est, "estimate");
        require(out, "out");
        *out = new sk_spec{est->value.kernel};
    });
}

double sk_estimate_lambda(const sk_estimate* est) {
    return est ? est->value.lambda : std::nan("");
}

double sk_estimate_sigma2(const sk_estimate* est) {
    return est ? est->value.sigma2 : std::nan("");
}

double sk_estimate_nll(const sk_estimate* est) {
    return est ? est->value.nll : std::nan("");
}

size_t sk_estimate_dim(const sk_estimate* est) {
    return est ? static_cast<size_t>(est->value.g_hat.size()) : 0;
}

sk_status sk_estimate_g_hat(const sk_estimate* est, double* buf, size_t len) {
    return guarded([&] {
        require(est, "estimate");
        require(buf, "buf");
        const auto& g = est->value.g_hat;
        if (len < static_cast<size_t>(g.size())) {
            fail(ErrorCode::Dimension, "buffer is shorter than the impulse response");
        }
        std::copy(g.data(), g.data() + g.size(), buf);
    });
}

void sk_estimate_free(sk_estimate* est) {
    delete est;
}

sk_status sk_mc_run(const char* config_json, sk_mc_result** out) {
    return guarded([&] {
        require(out, "out");
        const ExperimentConfig config = parse_experiment_config(config_json ? config_json : "{}");
        auto r = run_monte_carlo(config);
        *out = new sk_mc_result{std::move(r)};
    });
}

sk_status sk_mc_write_csv(const sk_mc_result* result, const char* path) {
    return guarded([&] {
        require(result, "result");
        write_to(path, [&](std::ostream& os) { io::write_mc_csv(os, result->value); });
    });
}

sk_status sk_mc_summary(const sk_mc_result* result, char** out) {
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        std::ostringstream os;
        for (const auto& s : summarize(result->value)) {
            os << s.label << " median_airf=" << io::format_number(s.median_airf) << " ok=" << s.succeeded
               << " failed=" << s.failed << '\n';
        }
        *out = duplicate(os.str());
    });
}

sk_status sk_mc_median(const sk_mc_result* result, const char* label, double* out) {
    return guarded([&] {
        require(result, "result");
        require(label, "label");
        require(out, "out");
        for (const auto& s : summarize(result->value)) {
            if (s.label == label) {
                *out = s.median_airf;
                return;
            }
        }
        fail(ErrorCode::Parse, std::string("estimator ") + label + " is not part of this study");
    });
}

sk_status sk_mc_counts(const sk_mc_result* result, size_t* succeeded, size_t* failed) {
    return guarded([&] {
        require(result, "result");
        size_t ok = 0;
        size_t bad = 0;
        for (const auto& rec : result->value.records) {
            (rec.ok ? ok : bad) += 1;
        }
        if (succeeded != nullptr) *succeeded = ok;
        if (failed != nullptr) *failed = bad;
    });
}

void sk_mc_free(sk_mc_result* result) {
    delete result;
}

sk_status sk_psd_compute(const sk_spec* spec, size_t dim, size_t grid, int normalize, sk_psd** out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        const Eigen::Index n = dim == 0 ? spectral_dim(spec->value) : to_index(dim, "dim");
        const auto w = stationary_part(spec->value, n);
        auto p = psd(w.w, to_index(grid, "grid"), normalize != 0);
        *out = new sk_psd{std::move(p)};
    });
}

sk_status sk_stationary_spread(const sk_spec* spec, size_t dim, double* out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        *out = stationary_part(spec->value, to_index(dim, "dim"), std::numeric_limits<double>::infinity()).spread;
    });
}

size_t sk_psd_size(const sk_psd* p) {
    return p ? p->value.theta.size() : 0;
}

sk_status sk_psd_get(const sk_psd* p, size_t index, double* theta, double* phi) {
    return guarded([&] {
        require(p, "psd");
        if (index >= p->value.theta.size()) {
            fail(ErrorCode::Dimension, "PSD index out of range");
        }
        if (theta != nullptr) *theta = p->value.theta[index];
        if (phi != nullptr) *phi = p->value.phi[index];
    });
}

sk_status sk_psd_write_csv(const sk_psd* p, const char* path) {
    return guarded([&] {
        require(p, "psd");
        write_to(path, [&](std::ostream& os) { io::write_psd_csv(os, p->value); });
    });
}

sk_status sk_psd_low_frequency_mass(const sk_psd* p, double cutoff, double* out) {
    return guarded([&] {
        require(p, "psd");
        require(out, "out");
        *out = low_frequency_mass(p->value, cutoff);
    });
}

void sk_psd_free(sk_psd* p) {
    delete p;
}

}  // extern "C"
