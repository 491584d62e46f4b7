// Command-line front end. Talks to the library only through the C interface.

#include "stablekern/stablekern.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Failure {
    std::string message;
};

void check(sk_status status) {
    if (status != SK_OK) {
        throw Failure{std::string(sk_status_name(status)) + ": " + sk_last_error_message()};
    }
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Spec = std::unique_ptr<sk_spec, Deleter<sk_spec, sk_spec_free>>;
using Matrix = std::unique_ptr<sk_matrix, Deleter<sk_matrix, sk_matrix_free>>;
using Bands = std::unique_ptr<sk_bands, Deleter<sk_bands, sk_bands_free>>;
using DataSet = std::unique_ptr<sk_dataset, Deleter<sk_dataset, sk_dataset_free>>;
using Estimate = std::unique_ptr<sk_estimate, Deleter<sk_estimate, sk_estimate_free>>;
using McResult = std::unique_ptr<sk_mc_result, Deleter<sk_mc_result, sk_mc_free>>;
using Spectrum = std::unique_ptr<sk_psd, Deleter<sk_psd, sk_psd_free>>;

std::string take_string(char* s) {
    std::string out(s ? s : "");
    sk_string_free(s);
    return out;
}

// Same convention as the library's CSV writers: exact zero prints as "0".
std::string fmt(double v) {
    if (v == 0.0) {
        return "0";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

const char* path_or_null(const std::string& path) {
    return path.empty() || path == "-" ? nullptr : path.c_str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path_or_null(path) == nullptr) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw Failure{"io: cannot write '" + path + "'"};
    }
}

struct SpecFlags {
    std::string family;
    double beta = std::nan("");
    double alpha = std::nan("");
    int delta = 0;
    double gamma = std::nan("");

    void attach(CLI::App* app, bool required = true) {
        auto* f = app->add_option("--family", family,
                                  "Kernel family: DI TC DC SS TC<d> DC<d> HF<d> HC<d> or TCd/DCd/HFd/HCd with --delta");
        if (required) {
            f->required();
        }
        app->add_option("--beta", beta, "Decay rate in (0, 1)");
        app->add_option("--alpha", alpha, "Correlation parameter (DC, DCd, HCd)");
        app->add_option("--delta", delta, "Kernel order")->check(CLI::PositiveNumber);
        app->add_option("--gamma", gamma, "SS decay in (0, 1)");
    }

    [[nodiscard]] Spec make(int delta_override = 0) const {
        sk_spec* raw = nullptr;
        check(sk_spec_from_label(family.c_str(), beta, alpha, delta_override > 0 ? delta_override : delta, gamma,
                                 &raw));
        return Spec(raw);
    }
};

// ---- kernel ----

struct KernelCmd {
    SpecFlags spec;
    std::size_t dim = 0;
    bool inverse = false;
    bool cholesky = false;
    bool logdet = false;
    std::string out;

    void attach(CLI::App* app) {
        spec.attach(app);
        app->add_option("--dim", dim, "Kernel dimension T")->required()->check(CLI::PositiveNumber);
        auto* i = app->add_flag("--inverse", inverse, "Write K^{-1}");
        auto* c = app->add_flag("--cholesky", cholesky, "Write L with L L^T = K^{-1}");
        auto* l = app->add_flag("--logdet", logdet, "Print log det K");
        i->excludes(c)->excludes(l);
        c->excludes(l);
        app->add_option("--out", out, "Output path (default stdout)");
    }

    int run() const {
        const Spec s = spec.make();
        if (logdet) {
            double v = 0.0;
            check(sk_kernel_logdet(s.get(), dim, &v));
            write_text(out, fmt(v) + "\n");
            return kExitOk;
        }
        sk_matrix* raw = nullptr;
        if (inverse) {
            check(sk_kernel_inverse(s.get(), dim, &raw));
        } else if (cholesky) {
            check(sk_kernel_inverse_cholesky(s.get(), dim, &raw, nullptr));
        } else {
            check(sk_kernel_build(s.get(), dim, &raw));
        }
        const Matrix m(raw);
        check(sk_matrix_write_csv(m.get(), path_or_null(out)));
        return kExitOk;
    }
};

// ---- maxent-verify ----

struct MaxentCmd {
    SpecFlags spec;
    std::size_t dim = 0;
    double tol = 1e-8;
    int bandwidth = -1;
    std::string perturb;
    std::string bands_path;
    std::string dump_bands;
    std::string completion_out;

    void attach(CLI::App* app) {
        spec.attach(app);
        app->add_option("--dim", dim, "Kernel dimension T (taken from --bands when given)")
            ->check(CLI::PositiveNumber);
        app->add_option("--tol", tol, "Pass threshold on the max entrywise deviation")->check(CLI::PositiveNumber);
        app->add_option("--bandwidth", bandwidth, "Band m (default: bandwidth of the kernel inverse)")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--perturb", perturb, "Add delta to band entry t,s before completing: t,s,delta");
        app->add_option("--bands", bands_path, "Read the band triples (t,s,value) from a CSV file");
        app->add_option("--dump-bands", dump_bands, "Write the band triples used");
        app->add_option("--completion-out", completion_out, "Write the completed matrix as CSV");
    }

    int run() const {
        const Spec s = spec.make();
        Bands bands;
        std::size_t n = dim;
        if (!bands_path.empty()) {
            sk_bands* raw = nullptr;
            check(sk_bands_read_csv(bands_path.c_str(), &raw));
            bands.reset(raw);
            n = sk_bands_dim(bands.get());
        } else {
            if (n == 0) {
                throw CLI::ValidationError("--dim", "required unless --bands is given");
            }
            int m = bandwidth;
            if (m < 0) {
                check(sk_kernel_inverse_bandwidth(s.get(), &m));
                if (m < 0) {
                    throw Failure{"dimension: family has no banded inverse; pass --bandwidth"};
                }
            }
            sk_matrix* kraw = nullptr;
            check(sk_kernel_build(s.get(), n, &kraw));
            const Matrix k(kraw);
            sk_bands* raw = nullptr;
            check(sk_bands_from_matrix(k.get(), static_cast<std::size_t>(m), &raw));
            bands.reset(raw);
        }
        if (!perturb.empty()) {
            std::size_t t = 0, u = 0;
            double delta = 0.0;
            char c1 = 0, c2 = 0;
            std::istringstream in(perturb);
            if (!(in >> t >> c1 >> u >> c2 >> delta) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof()) {
                throw CLI::ValidationError("--perturb", "expected t,s,delta");
            }
            check(sk_bands_perturb(bands.get(), t, u, delta));
        }
        if (!dump_bands.empty()) {
            check(sk_bands_write_csv(bands.get(), path_or_null(dump_bands)));
        }

        int feasible = 0;
        std::size_t first = 0;
        check(sk_bands_check_feasibility(bands.get(), &feasible, &first));
        if (!feasible) {
            std::cerr << "stablekern: infeasible bands: sliding block " << first << " is not positive definite\n";
            return kExitFailure;
        }
        sk_matrix* craw = nullptr;
        double entropy = 0.0;
        check(sk_maxent_complete(bands.get(), &craw, &entropy));
        const Matrix completion(craw);
        if (!completion_out.empty()) {
            check(sk_matrix_write_csv(completion.get(), path_or_null(completion_out)));
        }
        sk_matrix* kraw = nullptr;
        check(sk_kernel_build(s.get(), n, &kraw));
        const Matrix reference(kraw);
        double deviation = 0.0;
        check(sk_matrix_max_abs_diff(completion.get(), reference.get(), &deviation));
        const bool pass = deviation < tol;
        std::cout << "max_deviation=" << fmt(deviation) << "\n"
                  << "entropy=" << fmt(entropy) << "\n"
                  << "tolerance=" << fmt(tol) << "\n"
                  << (pass ? "PASS" : "FAIL") << "\n";
        return pass ? kExitOk : kExitFailure;
    }
};

// ---- fit ----

struct FitCmd {
    std::string data;
    SpecFlags spec;
    std::size_t dim = 50;
    std::string sigma2 = "estimate";
    std::string out;

    void attach(CLI::App* app) {
        app->add_option("--data", data, "CSV with columns t,u,y")->required();
        spec.attach(app);
        app->add_option("--dim", dim, "Impulse response length T")->check(CLI::PositiveNumber);
        app->add_option("--sigma2", sigma2, "Noise variance: a positive number or 'estimate'")
            ->check([](const std::string& v) -> std::string {
                if (v == "estimate") {
                    return {};
                }
                try {
                    std::size_t used = 0;
                    const double x = std::stod(v, &used);
                    if (used == v.size() && x > 0.0 && std::isfinite(x)) {
                        return {};
                    }
                } catch (const std::exception&) {
                }
                return "must be a positive number or 'estimate'";
            });
        app->add_option("--out", out, "Output path for the JSON result (default stdout)");
    }

    int run() const {
        const Spec s = spec.make();
        sk_dataset* raw = nullptr;
        check(sk_dataset_read_csv(data.c_str(), &raw));
        const DataSet d(raw);
        if (sigma2 != "estimate") {
            check(sk_dataset_set_sigma2(d.get(), std::stod(sigma2)));
        }
        sk_estimate* eraw = nullptr;
        check(sk_fit(d.get(), s.get(), dim, &eraw));
        const Estimate e(eraw);
        char* json = nullptr;
        check(sk_estimate_to_json(e.get(), &json));
        write_text(out, take_string(json) + "\n");
        return kExitOk;
    }
};

// ---- mc ----

struct McCmd {
    int study = 1;
    int runs = 50;
    unsigned long long seed = 1;
    std::string estimators;
    std::string out;
    std::string config;
    long n = 500;
    long dim = 50;
    double snr = 1.0;
    double band = 0.2;
    unsigned threads = 0;
    std::string sigma2 = "estimate";
    std::string reference = "mean";
    std::string impulse = "damped";
    bool timing = false;
    CLI::App* app = nullptr;

    void attach(CLI::App* a) {
        app = a;
        a->add_option("--study", study, "Study 1 or 2")->check(CLI::IsMember({1, 2}));
        a->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
        a->add_option("--seed", seed, "Master seed");
        a->add_option("--estimators", estimators, "Comma-separated labels (default: DI,DC,TC,SS,TC2..TC6,DC2..DC6)");
        a->add_option("--out", out, "CSV output path (default stdout)");
        a->add_option("--config", config, "JSON study configuration; explicit flags override it");
        a->add_option("--N", n, "Data length")->check(CLI::PositiveNumber);
        a->add_option("--dim", dim, "Impulse response length T")->check(CLI::PositiveNumber);
        a->add_option("--snr", snr, "Signal-to-noise ratio")->check(CLI::PositiveNumber);
        a->add_option("--band", band, "Input band edge as a fraction of Nyquist")->check(CLI::Range(1e-6, 1.0));
        a->add_option("--threads", threads, "Worker threads (0: all cores; STABLEKERN_THREADS overrides)");
        a->add_option("--sigma2", sigma2, "Noise variance used in fits")->check(CLI::IsMember({"estimate", "true"}));
        a->add_option("--reference", reference, "AIRF reference level")->check(CLI::IsMember({"mean", "sum"}));
        a->add_option("--impulse", impulse, "Impulse response shape")->check(CLI::IsMember({"damped", "undamped"}));
        a->add_flag("--timing", timing, "Record wall time per fit (otherwise 0)");
    }

    [[nodiscard]] bool given(const char* name) const { return app->count(name) > 0; }

    int run() const {
        nlohmann::json j = nlohmann::json::object();
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) {
                throw Failure{"io: cannot open '" + config + "'"};
            }
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw Failure{std::string("parse: ") + e.what()};
            }
            if (!j.is_object()) {
                throw Failure{"parse: configuration must be a JSON object"};
            }
        }
        auto set = [&](const char* flag, const char* key, auto value) {
            if (given(flag) || !j.contains(key)) {
                j[key] = value;
            }
        };
        set("--study", "study", study);
        set("--runs", "runs", runs);
        set("--seed", "seed", seed);
        set("--N", "N", n);
        set("--dim", "T", dim);
        set("--snr", "snr", snr);
        set("--band", "band", band);
        set("--threads", "threads", threads);
        set("--sigma2", "sigma2", sigma2);
        set("--reference", "reference", reference);
        set("--impulse", "impulse", impulse);
        if (given("--timing")) {
            j["timing"] = true;
        }
        if (given("--estimators")) {
            std::vector<std::string> labels;
            std::stringstream ss(estimators);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) {
                    labels.push_back(item);
                }
            }
            if (labels.empty()) {
                throw CLI::ValidationError("--estimators", "no estimator labels given");
            }
            j["estimators"] = labels;
        }
        if (const char* env = std::getenv("STABLEKERN_THREADS"); env != nullptr && *env != '\0') {
            char* end = nullptr;
            const unsigned long v = std::strtoul(env, &end, 10);
            if (*end != '\0') {
                throw Failure{"parse: STABLEKERN_THREADS must be a non-negative integer"};
            }
            j["threads"] = v;
        }

        sk_mc_result* raw = nullptr;
        check(sk_mc_run(j.dump().c_str(), &raw));
        const McResult r(raw);
        check(sk_mc_write_csv(r.get(), path_or_null(out)));
        char* summary = nullptr;
        check(sk_mc_summary(r.get(), &summary));
        std::cerr << take_string(summary);
        std::size_t ok = 0, failed = 0;
        check(sk_mc_counts(r.get(), &ok, &failed));
        if (ok == 0) {
            std::cerr << "stablekern: every fit failed\n";
            return kExitFailure;
        }
        return kExitOk;
    }
};

// ---- psd ----

struct PsdCmd {
    SpecFlags spec;
    std::size_t grid = 512;
    bool normalize = false;
    std::string out;
    std::size_t dim = 0;
    std::string sweep;
    double cutoff = std::nan("");

    void attach(CLI::App* app) {
        spec.attach(app);
        app->add_option("--grid", grid, "Number of frequencies on [0, pi]")->check(CLI::Range(2, 1 << 24));
        app->add_flag("--normalize", normalize, "Scale the spectrum to a maximum of 1");
        app->add_option("--out", out, "CSV output path (default stdout)");
        app->add_option("--dim", dim,
                        "Dimension used to extract the stationary part (default: automatic, at least 200)");
        app->add_option("--sweep-delta", sweep, "Order range a:b for order families; adds a delta column");
        app->add_option("--mass-cutoff", cutoff,
                        "Cutoff for the mass summary (default pi/4, 3pi/4 for HF/HC)")
            ->check(CLI::Range(0.0, std::numbers::pi));
    }

    [[nodiscard]] double effective_cutoff() const {
        if (!std::isnan(cutoff)) {
            return cutoff;
        }
        const bool high = spec.family.rfind("HF", 0) == 0 || spec.family.rfind("HC", 0) == 0;
        return high ? 0.75 * std::numbers::pi : 0.25 * std::numbers::pi;
    }

    int run() const {
        const double c = effective_cutoff();
        std::vector<int> orders;
        if (sweep.empty()) {
            orders.push_back(0);
        } else {
            int a = 0, b = 0;
            char colon = 0;
            std::istringstream in(sweep);
            if (!(in >> a >> colon >> b) || colon != ':' || !(in >> std::ws).eof() || a < 1 || b < a) {
                throw CLI::ValidationError("--sweep-delta", "expected a:b with 1 <= a <= b");
            }
            for (int d = a; d <= b; ++d) {
                orders.push_back(d);
            }
        }
        const std::string label = spec.family;
        std::ostringstream csv;
        csv << (sweep.empty() ? "theta,phi\n" : "delta,theta,phi\n");
        std::vector<double> low;
        for (int d : orders) {
            SpecFlags flags = spec;
            if (d > 0) {
                // the sweep replaces any explicit order in the label
                flags.family = label.substr(0, 2) + "d";
            }
            const Spec s = flags.make(d);
            sk_psd* raw = nullptr;
            check(sk_psd_compute(s.get(), dim, grid, normalize ? 1 : 0, &raw));
            const Spectrum p(raw);
            for (std::size_t i = 0; i < sk_psd_size(p.get()); ++i) {
                double theta = 0.0, phi = 0.0;
                check(sk_psd_get(p.get(), i, &theta, &phi));
                if (d > 0) {
                    csv << d << ',';
                }
                csv << fmt(theta) << ',' << fmt(phi) << '\n';
            }
            double mass = 0.0;
            check(sk_psd_low_frequency_mass(p.get(), c, &mass));
            low.push_back(mass);
            char* text = nullptr;
            check(sk_spec_label(s.get(), &text));
            std::cerr << take_string(text) << " low_mass(" << fmt(c) << ")=" << fmt(mass)
                      << " high_mass=" << fmt(1.0 - mass) << "\n";
        }
        if (low.size() > 1) {
            bool up = true, down = true;
            for (std::size_t i = 1; i < low.size(); ++i) {
                up = up && low[i] > low[i - 1];
                down = down && low[i] < low[i - 1];
            }
            std::cerr << "low_mass strictly increasing: " << (up ? "yes" : "no") << "\n"
                      << "high_mass strictly increasing: " << (down ? "yes" : "no") << "\n";
        }
        write_text(out, csv.str());
        return kExitOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stable kernels for impulse response estimation"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", "stablekern 1.0.0");

    KernelCmd kernel;
    MaxentCmd maxent;
    FitCmd fit;
    McCmd mc;
    PsdCmd psd;
    auto* k = app.add_subcommand("kernel", "Kernel matrix, inverse, inverse factor or log-determinant");
    auto* m = app.add_subcommand("maxent-verify", "Complete the kernel's bands by maximum entropy and compare");
    auto* f = app.add_subcommand("fit", "Fit a kernel by marginal likelihood to a dataset");
    auto* s = app.add_subcommand("mc", "Run a Monte Carlo study");
    auto* p = app.add_subcommand("psd", "Power spectral density of the kernel's stationary part");
    kernel.attach(k);
    maxent.attach(m);
    fit.attach(f);
    mc.attach(s);
    psd.attach(p);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            return app.exit(e);
        }
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (k->parsed()) return kernel.run();
        if (m->parsed()) return maxent.run();
        if (f->parsed()) return fit.run();
        if (s->parsed()) return mc.run();
        if (p->parsed()) return psd.run();
    } catch (const CLI::ParseError& e) {
        std::cerr << "stablekern: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Failure& e) {
        std::cerr << "stablekern: " << e.message << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "stablekern: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
