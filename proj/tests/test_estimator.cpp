#include "doctest.h"
#include "oracles.hpp"

#include "stablekern/errors.hpp"
#include "stablekern/estimator.hpp"
#include "stablekern/factor.hpp"

#include <random>

using namespace stablekern;

namespace {

KernelSpec make(Family f, double beta, double alpha = 0.0, int delta = 1, double gamma = 0.5) {
    KernelSpec s;
    s.family = f;
    s.beta = beta;
    s.alpha = alpha;
    s.delta = delta;
    s.gamma = gamma;
    return s;
}

Eigen::VectorXd randn(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::VectorXd v(n);
    for (auto& x : v) x = n01(rng);
    return v;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("regressor holds delayed inputs") {
    Eigen::VectorXd u(4);
    u << 1.0, 2.0, 3.0, 4.0;
    const Eigen::MatrixXd a = build_regressor(u, 4, 3);
    Eigen::MatrixXd expect(4, 3);
    expect << 0, 0, 0,
              1, 0, 0,
              2, 1, 0,
              3, 2, 1;
    CHECK(a == expect);
    std::mt19937_64 rng(1);
    const Eigen::VectorXd g = randn(6, rng);
    const Eigen::VectorXd w = randn(20, rng);
    CHECK((build_regressor(w, 20, 6) * g - oracle::convolve(g, w, 20)).norm() < 1e-13);
}

TEST_CASE("regularized estimate matches the dual form") {
    std::mt19937_64 rng(2);
    for (const auto& spec : {make(Family::TC, 0.8), make(Family::DCd, 0.7, 0.4, 2), make(Family::SS, 0.5, 0, 1, 0.9),
                             make(Family::TCd, 0.85, 0.0, 3), make(Family::HFd, 0.6, 0.0, 1)}) {
        for (auto [n, t] : {std::pair<Eigen::Index, Eigen::Index>{40, 10}, {6, 12}}) {
            CAPTURE(format_spec(spec));
            const Eigen::VectorXd u = randn(n, rng);
            const Eigen::VectorXd y = randn(n, rng);
            const Eigen::MatrixXd a = build_regressor(u, n, t);
            const Eigen::MatrixXd k = build_kernel(spec, t);
            const double lambda = 3.0;
            const double sigma2 = 0.4;
            const Eigen::VectorXd ref = oracle::dual_rls(a, y, k, lambda, sigma2);
            const Eigen::VectorXd banded = rls_estimate(a, y, inverse_cholesky(spec, t), lambda, sigma2);
            const Eigen::VectorXd dense = rls_estimate(a, y, k, lambda, sigma2);
            CHECK((banded - ref).norm() < 1e-8 * ref.norm());
            CHECK((dense - ref).norm() < 1e-8 * ref.norm());
            const LikelihoodEvaluator eval(a, y);
            CHECK((eval.estimate(inverse_cholesky(spec, t), lambda, sigma2) - ref).norm() < 1e-8 * ref.norm());
        }
    }
}

TEST_CASE("likelihood routes agree with the extended-precision value") {
    std::mt19937_64 rng(4);
    for (const auto& spec : {make(Family::DI, 0.7), make(Family::DC, 0.6, -0.5), make(Family::TCd, 0.9, 0.0, 2),
                             make(Family::HCd, 0.8, 0.3, 2), make(Family::SS, 0.5, 0.0, 1, 0.8),
                             make(Family::DCd, 0.75, 0.6, 4)}) {
        for (auto [n, t] : {std::pair<Eigen::Index, Eigen::Index>{30, 8}, {5, 9}, {60, 20}}) {
            CAPTURE(format_spec(spec));
            CAPTURE(n);
            const Eigen::VectorXd u = randn(n, rng);
            const Eigen::VectorXd y = randn(n, rng);
            const Eigen::MatrixXd a = build_regressor(u, n, t);
            const Eigen::MatrixXd k = oracle::kernel(spec, static_cast<int>(t));
            const double ref = oracle::nll(a, y, k, 2.5, 0.3);
            const double direct = nll_direct(y, a, build_kernel(spec, t), 2.5, 0.3);
            const BandedFactor l = inverse_cholesky(spec, t);
            const double qr = nll_qr(y, a, l, 2.5, 0.3);
            const double cached = LikelihoodEvaluator(a, y).nll(l, 2.5, 0.3);
            CHECK(direct == doctest::Approx(ref).epsilon(1e-9));
            CHECK(qr == doctest::Approx(ref).epsilon(1e-9));
            CHECK(cached == doctest::Approx(qr).epsilon(1e-11));
        }
    }
}

TEST_CASE("likelihood errors") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
    Eigen::MatrixXd k = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS((void)nll_direct(y, a, k, 1.0, -1.0), Error);
    try {
        (void)nll_direct(y, Eigen::MatrixXd::Ones(3, 2), k, 1.0, 0.1);
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Conditioning);
    }
    CHECK_THROWS_AS((void)rls_estimate(a, y, k, 1.0, 1.0), Error);
}

TEST_CASE("noise variance estimate") {
    std::mt19937_64 rng(9);
    const Eigen::Index n = 400;
    const Eigen::VectorXd u = randn(n, rng);
    Eigen::VectorXd g(5);
    g << 1.0, -0.5, 0.25, 0.1, 0.05;
    const Eigen::VectorXd clean = oracle::convolve(g, u, n);
    CHECK(estimate_sigma2(u, clean, 10) < 1e-25);
    const Eigen::VectorXd e = randn(n, rng) * 0.5;
    const Eigen::VectorXd y = clean + e;
    const Eigen::MatrixXd a = build_regressor(u, n, 10);
    const Eigen::VectorXd ls = a.colPivHouseholderQr().solve(y);
    const double ref = (y - a * ls).squaredNorm() / static_cast<double>(n - 10);
    CHECK(estimate_sigma2(u, y, 10) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(estimate_sigma2(u, y, 10) == doctest::Approx(0.25).epsilon(0.15));
    // Zero input: rank-deficient regressor, minimum-norm fallback.
    CHECK(estimate_sigma2(Eigen::VectorXd::Zero(20), y.head(20), 5) ==
          doctest::Approx(y.head(20).squaredNorm() / 15.0));
    CHECK_THROWS_AS((void)estimate_sigma2(u.head(5), y.head(5), 5), Error);
    CHECK(default_sigma2_order(500, 50) == 50);
    CHECK(default_sigma2_order(30, 50) == 10);
    CHECK(default_sigma2_order(2, 50) == 1);
}

TEST_CASE("dataset validation") {
    Dataset d;
    d.u = Eigen::VectorXd::Ones(3);
    d.y = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(validate(d), Error);
    d.y = Eigen::VectorXd::Ones(3);
    CHECK_NOTHROW(validate(d));
    d.sigma2 = 0.0;
    CHECK_THROWS_AS(validate(d), Error);
    d.sigma2.reset();
    d.y(1) = std::nan("");
    CHECK_THROWS_AS(validate(d), Error);
    Dataset empty;
    CHECK_THROWS_AS(validate(empty), Error);
}

}
