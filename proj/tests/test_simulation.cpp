#include "doctest.h"
#include "oracles.hpp"

#include "stablekern/errors.hpp"
#include "stablekern/simulation.hpp"

#include <numbers>

using namespace stablekern;

TEST_SUITE("simulation") {

TEST_CASE("impulse response from parameters") {
    const std::array<double, 3> a{0.8, 0.85, 0.9};
    const std::array<double, 3> b{0.4, 0.45, 0.5};
    const std::array<double, 3> c{0.1, 1.0, 3.0};
    const auto damped = impulse_from_params(a, b, c, 5);
    const auto flat = impulse_from_params(a, b, c, 5, ImpulseShape::Undamped);
    for (int t = 1; t <= 5; ++t) {
        double d = 0.0;
        double u = 0.0;
        for (int k = 0; k < 3; ++k) {
            d += std::pow(a[k], t) * std::cos(b[k] * t + c[k]);
            u += a[k] * std::cos(b[k] * t + c[k]);
        }
        CHECK(damped.g(t - 1) == doctest::Approx(d).epsilon(1e-14));
        CHECK(flat.g(t - 1) == doctest::Approx(u).epsilon(1e-14));
    }
}

TEST_CASE("sampled parameters lie in the study ranges") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const auto s1 = sample_impulse_response(1, 10, rng);
        const auto s2 = sample_impulse_response(2, 10, rng);
        for (int k = 0; k < 3; ++k) {
            CHECK(s1.a[k] >= 0.8);
            CHECK(s1.a[k] <= 0.9);
            CHECK(s2.a[k] >= 0.63);
            CHECK(s2.a[k] <= 0.73);
            CHECK(s1.b[k] >= 0.4);
            CHECK(s1.b[k] <= 0.5);
            CHECK(s2.c[k] >= 0.0);
            CHECK(s2.c[k] <= std::numbers::pi);
        }
    }
    CHECK_THROWS_AS((void)sample_impulse_response(3, 10, rng), Error);
}

TEST_CASE("input is band-limited with unit variance") {
    Rng rng(12);
    const Eigen::VectorXd u = generate_input(2000, 0.2, rng);
    CHECK(u.size() == 2000);
    const double var = (u.array() - u.mean()).square().sum() / 1999.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::periodogram_fraction(u, 0.25 * std::numbers::pi) > 0.99);
    Rng wide(12);
    const Eigen::VectorXd w = generate_input(2000, 1.0, wide);
    const double half = oracle::periodogram_fraction(w, 0.5 * std::numbers::pi);
    CHECK(half == doctest::Approx(0.5).epsilon(0.15));
    CHECK_THROWS_AS((void)generate_input(100, 0.2, rng), Error);
    CHECK_THROWS_AS((void)generate_input(500, 0.0, rng), Error);
    CHECK_THROWS_AS((void)generate_input(500, 1.5, rng), Error);
}

TEST_CASE("simulated output is the convolution plus scaled noise") {
    Rng rng(13);
    const Eigen::VectorXd u = generate_input(3000, 0.5, rng);
    const auto sys = sample_impulse_response(1, 30, rng);
    const auto out = simulate_output(sys.g, u, 4.0, rng);
    CHECK((out.y_clean - oracle::convolve(sys.g, u, 3000)).norm() < 1e-12 * out.y_clean.norm());
    const double var = (out.y_clean.array() - out.y_clean.mean()).square().sum() / 2999.0;
    CHECK(out.sigma2 == doctest::Approx(var / 4.0).epsilon(1e-12));
    const Eigen::VectorXd e = out.y - out.y_clean;
    CHECK(e.squaredNorm() / 3000.0 == doctest::Approx(out.sigma2).epsilon(0.1));
    CHECK_THROWS_AS((void)simulate_output(sys.g, u, 0.0, rng), Error);
    CHECK_THROWS_AS((void)simulate_output(Eigen::VectorXd::Zero(3), u, 1.0, rng), Error);
}

TEST_CASE("fit measure") {
    Eigen::VectorXd g(4);
    g << 1.0, 2.0, 3.0, 4.0;
    CHECK(airf(g, g) == 100.0);
    CHECK(airf(g, Eigen::VectorXd::Constant(4, 2.5)) == doctest::Approx(0.0).scale(1.0));
    const Eigen::VectorXd h = g + Eigen::VectorXd::Constant(4, 0.5);
    const double denom = std::sqrt(5.0);
    CHECK(airf(g, h) == doctest::Approx(100.0 * (1.0 - 1.0 / denom)));
    const double denom_sum = (g.array() - 10.0).matrix().norm();
    CHECK(airf(g, h, AirfReference::Sum) == doctest::Approx(100.0 * (1.0 - 1.0 / denom_sum)));
    try {
        (void)airf(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Zero(3));
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateReference);
    }
    CHECK_THROWS_AS((void)airf(g, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("run streams are reproducible and distinct") {
    auto a = run_stream(1, 0);
    auto b = run_stream(1, 0);
    auto c = run_stream(1, 1);
    auto d = run_stream(2, 0);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("default estimator list") {
    const auto est = default_estimators();
    std::vector<std::string> labels;
    for (const auto& e : est) labels.push_back(family_label(e));
    const std::vector<std::string> expect{"DI", "DC", "TC", "SS", "TC2", "TC3", "TC4",
                                          "TC5", "TC6", "DC2", "DC3", "DC4", "DC5", "DC6"};
    CHECK(labels == expect);
}

TEST_CASE("experiment config parsing") {
    const auto cfg = parse_experiment_config(
        R"({"study": 2, "runs": 3, "N": 300, "T": 20, "seed": 9, "estimators": ["TC", "DC2"],
            "snr": 2.5, "band": 0.3, "sigma2": "true", "reference": "sum", "impulse": "undamped",
            "threads": 2, "timing": true})");
    CHECK(cfg.study == 2);
    CHECK(cfg.runs == 3);
    CHECK(cfg.N == 300);
    CHECK(cfg.T == 20);
    CHECK(cfg.seed == 9);
    REQUIRE(cfg.estimators.size() == 2);
    CHECK(family_label(cfg.estimators[1]) == "DC2");
    CHECK(cfg.snr == 2.5);
    CHECK(cfg.band == 0.3);
    CHECK(cfg.true_sigma2);
    CHECK(cfg.reference == AirfReference::Sum);
    CHECK(cfg.shape == ImpulseShape::Undamped);
    CHECK(cfg.threads == 2);
    CHECK(cfg.timing);
    const auto defaults = parse_experiment_config("{}");
    CHECK(defaults.runs == 50);
    CHECK(defaults.N == 500);
    CHECK(defaults.T == 50);
    CHECK(defaults.estimators.size() == 14);
    for (const char* bad : {"[1]", "{", R"({"colour": 1})", R"({"runs": "x"})", R"({"sigma2": "maybe"})",
                            R"({"reference": "median"})", R"({"impulse": "ringing"})",
                            R"({"estimators": ["ZZ"]})"}) {
        CAPTURE(bad);
        try {
            (void)parse_experiment_config(bad);
            FAIL("expected an exception");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Parse);
        }
    }
    ExperimentConfig c;
    c.runs = 0;
    CHECK_THROWS_AS(validate(c), Error);
    c = {};
    c.N = 50;
    CHECK_THROWS_AS(validate(c), Error);
    c = {};
    c.estimators.clear();
    CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("Monte Carlo output is independent of the thread count") {
    ExperimentConfig cfg;
    cfg.runs = 3;
    cfg.N = 200;
    cfg.T = 10;
    cfg.estimators = {spec_from_label("DI"), spec_from_label("TC")};
    cfg.threads = 1;
    const auto one = run_monte_carlo(cfg);
    cfg.threads = 3;
    const auto three = run_monte_carlo(cfg);
    REQUIRE(one.records.size() == 6);
    REQUIRE(three.records.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(one.records[i].run == static_cast<int>(i / 2));
        CHECK(family_label(one.records[i].estimator) == (i % 2 == 0 ? "DI" : "TC"));
        CHECK(one.records[i].ok);
        CHECK(one.records[i].airf == three.records[i].airf);
        CHECK(one.records[i].lambda == three.records[i].lambda);
        CHECK(one.records[i].seconds == 0.0);
    }
    const auto summary = summarize(one);
    REQUIRE(summary.size() == 2);
    CHECK(summary[1].label == "TC");
    CHECK(summary[1].succeeded == 3);
    CHECK(summary[1].failed == 0);
    std::vector<double> tc{one.records[1].airf, one.records[3].airf, one.records[5].airf};
    std::sort(tc.begin(), tc.end());
    CHECK(summary[1].median_airf == tc[1]);
}

}
