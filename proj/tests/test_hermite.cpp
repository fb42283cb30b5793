#include <doctest.h>

#include <cmath>
#include <random>

#include "bmc/hermite.hpp"

using namespace bmc;

namespace {
constexpr double kSigmaA = 1.1547005383792515; // sigma_a for a=0.5, sigma=1
}

TEST_CASE("quadrature integrates gaussian moments exactly") {
    const GaussHermiteRule& rule = gauss_hermite(48);
    double w = 0, m2 = 0, m4 = 0, m6 = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = rule.nodes[i];
        w += rule.weights[i];
        m2 += rule.weights[i] * u * u;
        m4 += rule.weights[i] * u * u * u * u;
        m6 += rule.weights[i] * std::pow(u, 6);
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("hermite functions are orthonormal under mu") {
    for (int m = 0; m <= 8; ++m)
        for (int k = 0; k <= 8; ++k) {
            const double v = mu_inner(hermite_observable(kSigmaA, m),
                                      hermite_observable(kSigmaA, k));
            CHECK(std::fabs(v - (m == k ? 1.0 : 0.0)) < 1e-10);
        }
}

TEST_CASE("evaluate matches explicit low-degree polynomials") {
    // gbar_0 = 1, gbar_1 = u, gbar_2 = (u^2-1)/sqrt(2), gbar_3 = (u^3-3u)/sqrt(6)
    for (double x : {-2.5, -0.3, 0.0, 1.0, 3.7}) {
        const double u = x / kSigmaA;
        CHECK(hermite_observable(kSigmaA, 0).evaluate(x) == doctest::Approx(1.0));
        CHECK(hermite_observable(kSigmaA, 1).evaluate(x) == doctest::Approx(u));
        CHECK(hermite_observable(kSigmaA, 2).evaluate(x) ==
              doctest::Approx((u * u - 1) / std::sqrt(2.0)));
        CHECK(hermite_observable(kSigmaA, 3).evaluate(x) ==
              doctest::Approx((u * u * u - 3 * u) / std::sqrt(6.0)));
    }
}

TEST_CASE("decompose recovers known expansions") {
    const Observable fx = decompose([](double x) { return x; }, 4, kSigmaA);
    CHECK(fx.coeff(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fx.coeff(1) == doctest::Approx(kSigmaA).epsilon(1e-12));
    CHECK(std::fabs(fx.coeff(2)) < 1e-12);
    CHECK(std::fabs(fx.coeff(3)) < 1e-12);

    const Observable c3 = decompose([](double) { return 3.0; }, 2, kSigmaA);
    CHECK(c3.coeff(0) == doctest::Approx(3.0));
    CHECK(std::fabs(c3.coeff(1)) < 1e-13);

    // x^2 = sigma_a^2 (1 + sqrt(2) gbar_2)
    const Observable fx2 = decompose([](double x) { return x * x; }, 6, kSigmaA);
    const double sa2 = kSigmaA * kSigmaA;
    CHECK(fx2.coeff(0) == doctest::Approx(sa2).epsilon(1e-12));
    CHECK(std::fabs(fx2.coeff(1)) < 1e-12);
    CHECK(fx2.coeff(2) == doctest::Approx(std::sqrt(2.0) * sa2).epsilon(1e-12));
    CHECK(std::fabs(fx2.coeff(4)) < 1e-11);

    CHECK_THROWS_AS(decompose([](double x) { return x; }, 40, kSigmaA),
                    std::invalid_argument);
    CHECK_NOTHROW(decompose([](double x) { return x; }, 40, kSigmaA, true));
}

TEST_CASE("center zeroes the mean and is idempotent") {
    const Observable f(kSigmaA, {3.0, kSigmaA, 0.0});
    const Observable fc = center(f);
    CHECK(fc.coeff(0) == 0.0);
    CHECK(fc.coeff(1) == kSigmaA);
    CHECK(center(fc) == fc);
    CHECK(fc.mean() == 0.0);
    CHECK(mu_inner(fc, constant_observable(kSigmaA, 1.0)) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("projection onto the first eigenfunction") {
    const Observable fx = identity_observable(kSigmaA);
    CHECK(project_R(fx).coeff(1) == doctest::Approx(kSigmaA));
    CHECK(project_R(fx).coeff(0) == 0.0);

    // even functions have no gbar_1 component
    const Observable even =
        decompose([](double x) { return std::cos(x); }, 8, kSigmaA);
    CHECK(std::fabs(project_R(even).coeff(1)) < 1e-12);
    CHECK(project_R(hermite_observable(kSigmaA, 2)).is_zero());
}

TEST_CASE("hat removes mean and first eigen-component") {
    CHECK(hat(identity_observable(kSigmaA)).is_zero());
    const Observable fx2 = square_observable(kSigmaA);
    const Observable h = hat(fx2);
    CHECK(h.coeff(0) == 0.0);
    CHECK(h.coeff(1) == 0.0);
    CHECK(h.coeff(2) ==
          doctest::Approx(std::sqrt(2.0) * kSigmaA * kSigmaA).epsilon(1e-12));
    CHECK(project_R(h).is_zero());
    CHECK(h.mean() == 0.0);
}

TEST_CASE("parseval: quadrature inner product equals coefficient sum") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> coeff(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> c(1 + gen() % 9);
        for (double& v : c) v = coeff(gen);
        const Observable f(kSigmaA, c);
        double sum = 0.0;
        for (double v : c) sum += v * v;
        CHECK(mu_inner(f, f) == doctest::Approx(sum).epsilon(1e-10));
    }
}

TEST_CASE("multiply re-expands products exactly") {
    const Observable fx = identity_observable(kSigmaA);
    const Observable prod = multiply(fx, fx);
    const Observable sq = square_observable(kSigmaA);
    REQUIRE(prod.degree() == 2);
    for (int m = 0; m <= 2; ++m)
        CHECK(prod.coeff(m) == doctest::Approx(sq.coeff(m)).epsilon(1e-12));

    // (gbar_1)^2 = 1 + sqrt(2) gbar_2
    const Observable g1 = hermite_observable(kSigmaA, 1);
    const Observable g1sq = multiply(g1, g1);
    CHECK(g1sq.coeff(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g1sq.coeff(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("observables from different bases do not mix") {
    const Observable f(1.0, {0.0, 1.0});
    const Observable g(2.0, {0.0, 1.0});
    CHECK_THROWS_AS(add(f, g), std::invalid_argument);
    CHECK_THROWS_AS(multiply(f, g), std::invalid_argument);
    CHECK_THROWS_AS(mu_inner(f, g), std::invalid_argument);
    CHECK_THROWS_AS(Observable(0.0, {1.0}), std::invalid_argument);
}

TEST_CASE("sequence tail modes") {
    const Observable f = identity_observable(kSigmaA);
    const ObservableSequence single = ObservableSequence::single(f);
    CHECK(single.entry(0) == f);
    CHECK(single.entry(1).is_zero());
    CHECK(single.entry(9).is_zero());

    const ObservableSequence constant = ObservableSequence::constant(f);
    CHECK(constant.entry(0) == f);
    CHECK(constant.entry(17) == f);

    CHECK_THROWS_AS(ObservableSequence({}, ObservableSequence::Tail::zero),
                    std::invalid_argument);
    CHECK_THROWS_AS(ObservableSequence({f, Observable(2.0, {1.0})},
                                       ObservableSequence::Tail::zero),
                    std::invalid_argument);
}
