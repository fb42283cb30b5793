#include <doctest.h>

#include <cmath>

#include "bmc/moment_oracle.hpp"
#include "bmc/simulator.hpp"
#include "bmc/stat_tests.hpp"

using namespace bmc;

namespace {

// Independent closed forms for f(x) = x, straight from the Gaussian algebra
// (no Hermite machinery): Q^n(x)(y) = a^n y and
// Q^n(x^2)(y) = a^{2n} y^2 + sigma_a^2 (1 - a^{2n}).
double q_sq(double a, double sa2, int n, double y) {
    const double a2n = std::pow(a, 2 * n);
    return a2n * y * y + sa2 * (1.0 - a2n);
}

double closed_mean_x(double a, int n, double x) {
    return std::ldexp(std::pow(a, n) * x, n);
}

double closed_second_x(double a, double sa2, int n, double x) {
    double total = std::ldexp(q_sq(a, sa2, n, x), n);
    for (int k = 0; k < n; ++k)
        total += std::ldexp(std::pow(a, 2 * k + 2) * q_sq(a, sa2, n - k - 1, x),
                            n + k);
    return total;
}

double closed_cross_x(double a, double sa2, int n, int m, double x) {
    double total = std::ldexp(std::pow(a, n - m) * q_sq(a, sa2, m, x), n);
    for (int k = 0; k < m; ++k)
        total += std::ldexp(std::pow(a, n - m + 2 * k + 2) *
                                q_sq(a, sa2, m - k - 1, x),
                            n + k);
    return total;
}

} // namespace

TEST_CASE("mean of a generation sum") {
    const BarKernel k(0.5, 1.0);
    const Observable fx = k.identity();
    CHECK(mean_generation(fx, 3, 1.0, k) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mean_generation(k.constant(1.0), 10, 0.3, k) == doctest::Approx(1024.0));
    CHECK(mean_generation(fx, 6, 0.0, k) == doctest::Approx(0.0));
}

TEST_CASE("second moment of a generation sum") {
    const BarKernel k(0.5, 1.0);
    const Observable fx = k.identity();
    CHECK(second_moment_generation(fx, 1, 0.0, k) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(second_moment_generation(fx, 2, 0.0, k) ==
          doctest::Approx(6.0).epsilon(1e-13));
    CHECK(second_moment_generation(k.constant(1.0), 3, 0.7, k) ==
          doctest::Approx(64.0).epsilon(1e-13));

    const double sa2 = k.sigma_a() * k.sigma_a();
    for (int n : {0, 1, 2, 4, 7})
        for (double x : {0.0, 1.0, -2.0})
            CHECK(second_moment_generation(fx, n, x, k) ==
                  doctest::Approx(closed_second_x(0.5, sa2, n, x)).epsilon(1e-12));
}

TEST_CASE("cross moment across generations") {
    const BarKernel k(0.5, 1.0);
    const Observable fx = k.identity();
    CHECK(cross_moment(fx, fx, 1, 0, 1.0, k) == doctest::Approx(1.0).epsilon(1e-13));

    // m = n, f = g degenerates to the second moment
    for (int n : {0, 2, 5})
        CHECK(cross_moment(fx, fx, n, n, 0.8, k) ==
              doctest::Approx(second_moment_generation(fx, n, 0.8, k))
                  .epsilon(1e-12));

    // g = 1, m = 0 degenerates to the mean
    CHECK(cross_moment(fx, k.constant(1.0), 4, 0, 1.3, k) ==
          doctest::Approx(mean_generation(fx, 4, 1.3, k)).epsilon(1e-13));

    const double sa2 = k.sigma_a() * k.sigma_a();
    for (int n : {3, 5})
        for (int m : {0, 1, 3})
            for (double x : {0.0, 1.0})
                CHECK(cross_moment(fx, fx, n, m, x, k) ==
                      doctest::Approx(closed_cross_x(0.5, sa2, n, m, x))
                          .epsilon(1e-12));

    CHECK_THROWS_AS(cross_moment(fx, fx, 2, 3, 0.0, k), std::invalid_argument);
}

TEST_CASE("closed forms for a negative autoregression coefficient") {
    const BarKernel k(-0.6, 1.2);
    const Observable fx = k.identity();
    const double sa2 = k.sigma_a() * k.sigma_a();
    for (int n : {1, 3, 6}) {
        CHECK(mean_generation(fx, n, 1.0, k) ==
              doctest::Approx(closed_mean_x(-0.6, n, 1.0)).epsilon(1e-12));
        CHECK(second_moment_generation(fx, n, 1.0, k) ==
              doctest::Approx(closed_second_x(-0.6, sa2, n, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("cauchy-schwarz and variance positivity on a grid") {
    const BarKernel k(0.45, 0.9);
    const Observable fx = k.identity();
    const Observable g3 = k.hermite(3);
    for (int n : {1, 3, 5})
        for (int m = 0; m <= n; ++m)
            for (double x : {-1.5, 0.0, 2.0}) {
                const double c = cross_moment(fx, g3, n, m, x, k);
                const double s1 = second_moment_generation(fx, n, x, k);
                const double s2 = second_moment_generation(g3, m, x, k);
                CHECK(c * c <= s1 * s2 * (1.0 + 1e-16) + 1e-12);
                const double mean = mean_generation(fx, n, x, k);
                CHECK(s1 - mean * mean >= -1e-9);
            }
}

TEST_CASE("stationary variances against the explicit pair sums") {
    const BarKernel k(0.5, 1.0);
    const Observable fx = k.identity();
    const double sa2 = k.sigma_a() * k.sigma_a();
    const double a = 0.5;

    // E_mu[M_p M_q] = sigma_a^2 a^{p-q} 2^p (1 + a^2 sum_{k<q} (2a^2)^k), p >= q
    auto pair_mean = [&](int p, int q) {
        double s = 0.0;
        for (int j = 0; j < q; ++j) s += std::pow(2 * a * a, j);
        return sa2 * std::pow(a, p - q) * std::ldexp(1.0 + a * a * s, p);
    };
    for (int n : {0, 1, 4, 6}) {
        CHECK(stationary_variance_generation(fx, n, k) ==
              doctest::Approx(pair_mean(n, n)).epsilon(1e-12));
        double tree = 0.0;
        for (int p = 0; p <= n; ++p)
            for (int q = 0; q <= n; ++q) tree += pair_mean(std::max(p, q), std::min(p, q));
        CHECK(stationary_variance_tree(fx, n, k) ==
              doctest::Approx(tree).epsilon(1e-12));
    }
}

TEST_CASE("monte carlo agreement at a reduced scale") {
    const BarKernel k(0.5, 1.0);
    const Observable g3 = k.hermite(3);
    const int n = 5, R = 4000;
    const double x0 = 1.0;

    SimulationConfig sim;
    sim.kernel = &k;
    sim.depth = n;
    sim.replicates = R;
    sim.initial = InitialDistribution::point(x0);
    sim.master_seed = 424242;
    const Ensemble ens = run_replicates(sim, {g3}, nullptr);

    // raw (uncentered) generation sum: g3 has zero mean under mu anyway
    const std::vector<double> sums = ens.collect(
        [&](const ReplicateStatistics& r) { return r.m_gen[0][n]; });
    const SampleSummary s = empirical_summary(sums);
    const double want_mean = mean_generation(g3, n, x0, k);
    CHECK(std::fabs(s.mean - want_mean) <=
          4.0 * std::sqrt(s.variance / double(R)));

    std::vector<double> squares(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) squares[i] = sums[i] * sums[i];
    const SampleSummary s2 = empirical_summary(squares);
    const double want_second = second_moment_generation(g3, n, x0, k);
    CHECK(std::fabs(s2.mean - want_second) <=
          4.0 * std::sqrt(s2.variance / double(R)));
}
