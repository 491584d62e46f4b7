#include "doctest.h"
#include "oracles.hpp"

#include "stablekern/errors.hpp"
#include "stablekern/factor.hpp"
#include "stablekern/series.hpp"

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

std::vector<KernelSpec> banded_specs() {
    std::vector<KernelSpec> out;
    for (double b : {0.2, 0.6, 0.9}) {
        out.push_back(make(Family::DI, b));
        out.push_back(make(Family::TC, b));
        out.push_back(make(Family::DC, b, 0.5));
        out.push_back(make(Family::DC, b, -0.5));
        for (int d = 1; d <= 4; ++d) {
            out.push_back(make(Family::TCd, b, 0.0, d));
            out.push_back(make(Family::DCd, b, 0.0, d));
            out.push_back(make(Family::DCd, b, 0.35, d));
            out.push_back(make(Family::DCd, b, 1.0, d));
            out.push_back(make(Family::HFd, b, 0.0, d));
            out.push_back(make(Family::HCd, b, 0.8, d));
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("factor") {

TEST_CASE("prefilter coefficients") {
    CHECK(series::prefilter(1, 0.3) == ToeplitzSeq{1.0, -0.3});
    CHECK(series::prefilter(2, 1.0) == ToeplitzSeq{1.0, -2.0, 1.0});
    const auto p = series::prefilter(3, 0.5);
    const ToeplitzSeq expect{1.0, -2.5, 2.0, -0.5};
    REQUIRE(p.size() == expect.size());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(expect[i]));
}

TEST_CASE("lag sums reproduce the brute-force kernel") {
    for (int d = 1; d <= 6; ++d) {
        for (double a : {0.0, 0.6, 1.0}) {
            const double b = 0.75;
            const auto w = series::lag_sums(d, a, b, 6);
            for (int tau = 0; tau < 6; ++tau) {
                const long double ref = oracle::correlated_kernel(d, a, b, 1.0L, 1 + tau)(tau, 0) /
                                      std::pow(static_cast<long double>(b), static_cast<long double>(1 + tau));
                CAPTURE(d);
                CAPTURE(a);
                CAPTURE(tau);
                CHECK(w[static_cast<std::size_t>(tau)] ==
                      doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("inverse matches the equilibrated dense inverse") {
    for (const auto& spec : banded_specs()) {
        for (Eigen::Index T : {Eigen::Index(spec.delta), Eigen::Index(7), Eigen::Index(16)}) {
            CAPTURE(format_spec(spec));
            CAPTURE(T);
            const oracle::MatrixL k = oracle::kernel_l(spec, static_cast<int>(T));
            const Eigen::MatrixXd ref = oracle::equilibrated_inverse(k, envelope_rate(spec));
            const Eigen::MatrixXd inv = build_inverse(spec, T);
            CHECK(oracle::rel_err(inv, ref) < oracle::oracle_tolerance(k, envelope_rate(spec), 1e-8));
        }
    }
}

TEST_CASE("inverse is banded with the stated bandwidth") {
    for (const auto& spec : banded_specs()) {
        const Eigen::Index T = 14;
        const Eigen::MatrixXd inv = build_inverse(spec, T);
        const int m = inverse_bandwidth(spec);
        for (Eigen::Index t = 0; t < T; ++t) {
            for (Eigen::Index s = 0; s < T; ++s) {
                if (std::abs(t - s) > m) {
                    CHECK(inv(t, s) == 0.0);
                }
            }
        }
        CHECK((inv - inv.transpose()).norm() == 0.0);
    }
}

TEST_CASE("decomposition reassembles the inverse") {
    for (const auto& spec : banded_specs()) {
        const Eigen::Index T = 11;
        const auto dec = inverse_decomposition(spec, T);
        const Eigen::Index e = dec.order();
        // a DC prefilter with alpha = 0 loses its last coefficient
        const bool popped = (spec.family == Family::DCd || spec.family == Family::HCd) && spec.alpha == 0.0 &&
                            spec.delta >= 3;
        CHECK(e == inverse_bandwidth(spec) - (popped ? 1 : 0));
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(T, T);
        for (Eigen::Index k = 0; k < T - e; ++k) d(k, k) = std::pow(dec.beta, -static_cast<double>(k + 1));
        if (e > 0) d.bottomRightCorner(e, e) = dec.trailing;
        const Eigen::MatrixXd p = lower_toeplitz(dec.prefilter, T);
        Eigen::MatrixXd inv = p * d * p.transpose() / dec.kappa;
        if (dec.flipped) {
            for (Eigen::Index t = 0; t < T; ++t)
                for (Eigen::Index s = 0; s < T; ++s)
                    if ((t + s) % 2 == 1) inv(t, s) = -inv(t, s);
        }
        CHECK(oracle::rel_err(inv, build_inverse(spec, T)) < 1e-13);
    }
}

TEST_CASE("closed-form trailing block agrees with the series block") {
    for (double a : {0.0, 0.4, 1.0}) {
        for (double b : {0.3, 0.85}) {
            const auto spec = make(Family::DCd, b, a, 2);
            const Eigen::Index T = 9;
            const auto dec = inverse_decomposition(spec, T);
            // with alpha = 0 the series drops the zero tap and works at order one
            if (a == 0.0) continue;
            const Eigen::MatrixXd m = series::trailing_gram(2, a, b);
            const Eigen::MatrixXd series_block = std::pow(b, -static_cast<double>(T)) * m.inverse();
            CHECK(oracle::rel_err(dec.trailing, series_block) < 1e-10);
            const auto tf = series::trailing_factor(2, a, b, T);
            CHECK(tf.factor.isLowerTriangular());
            CHECK(oracle::rel_err(tf.factor * tf.factor.transpose(), dec.trailing) < 1e-12);
            CHECK(tf.logdet == doctest::Approx(std::log(dec.trailing.determinant())).epsilon(1e-12));
        }
    }
}

TEST_CASE("Cholesky factor of the inverse") {
    for (const auto& spec : banded_specs()) {
        for (Eigen::Index T : {Eigen::Index(std::max(spec.delta, 1)), Eigen::Index(9), Eigen::Index(18)}) {
            CAPTURE(format_spec(spec));
            CAPTURE(T);
            const BandedFactor l = inverse_cholesky(spec, T);
            const Eigen::MatrixXd dense = l.dense();
            CHECK(dense.isLowerTriangular());
            CHECK(l.bandwidth() <= std::max(0, inverse_bandwidth(spec)));
            const Eigen::MatrixXd inv = build_inverse(spec, T);
            CHECK(oracle::rel_err(dense * dense.transpose(), inv) < 1e-10);
            const oracle::MatrixL k = oracle::kernel_l(spec, static_cast<int>(T));
            const double ref = oracle::equilibrated_logdet(k, envelope_rate(spec));
            const double tol = oracle::oracle_tolerance(k, envelope_rate(spec), 1e-10);
            CHECK(std::abs(l.logdet_K - ref) <= tol * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("high-order log determinants against 60-digit references") {
    // log det of the TC4 kernel at beta = 0.9 from the series definition in
    // 60-digit arithmetic (mpmath); beyond what the long double oracle certifies.
    const auto spec = make(Family::TCd, 0.9, 0.0, 4);
    CHECK(inverse_cholesky(spec, 9).logdet_K == doctest::Approx(32.10013828330255205).epsilon(1e-12));
    CHECK(inverse_cholesky(spec, 18).logdet_K == doctest::Approx(18.82471331041644121).epsilon(1e-12));
}

TEST_CASE("SS uses a dense factor of the inverse") {
    for (double g : {0.3, 0.7, 0.95}) {
        const auto spec = make(Family::SS, 0.5, 0.0, 1, g);
        const Eigen::Index T = 10;
        const BandedFactor l = inverse_cholesky(spec, T);
        const Eigen::MatrixXd dense = l.dense();
        const Eigen::MatrixXd k = oracle::kernel(spec, static_cast<int>(T));
        const Eigen::MatrixXd ref = oracle::equilibrated_inverse(k, envelope_rate(spec));
        CHECK(oracle::rel_err(dense * dense.transpose(), ref) < 1e-8);
        CHECK(l.logdet_K == doctest::Approx(oracle::equilibrated_logdet(k, envelope_rate(spec))).epsilon(1e-10));
        CHECK_THROWS_AS((void)inverse_decomposition(spec, T), Error);
    }
}

TEST_CASE("banded Cholesky of a random banded matrix") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (Eigen::Index m : {0, 1, 3}) {
        const Eigen::Index n = 12;
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = std::max<Eigen::Index>(0, i - m); j <= i; ++j) b(i, j) = n01(rng);
        b.diagonal().array() = b.diagonal().array().abs() + 1.0;
        const Eigen::MatrixXd a = b * b.transpose();  // bandwidth 2m
        const BandedFactor f = banded_cholesky(a, 2 * m);
        const Eigen::MatrixXd l = f.dense();
        CHECK(oracle::rel_err(l * l.transpose(), a) < 1e-13);
        const Eigen::MatrixXd ref = Eigen::LLT<Eigen::MatrixXd>(a).matrixL();
        CHECK(oracle::rel_err(l, ref) < 1e-12);
        CHECK(f.logdet_K == doctest::Approx(-oracle::log_det_spd(a)).epsilon(1e-12));
        const Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
        CHECK((l * f.solve_lower(rhs) - rhs).norm() < 1e-12);
    }
}

TEST_CASE("banded Cholesky rejects indefinite input") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;
    try {
        (void)banded_cholesky(a, 1);
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Factorization);
    }
}

TEST_CASE("dense inverse factor") {
    const auto spec = make(Family::TCd, 0.7, 0.0, 2);
    const Eigen::MatrixXd k = build_kernel(spec, 8);
    const Eigen::MatrixXd l = dense_inverse_factor(k).dense();
    CHECK(l.isLowerTriangular());
    CHECK(oracle::rel_err(l * l.transpose(), build_inverse(spec, 8)) < 1e-10);
}

TEST_CASE("dimension below the order is rejected") {
    try {
        (void)build_inverse(make(Family::TCd, 0.5, 0.0, 3), 2);
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Dimension);
    }
}

}
