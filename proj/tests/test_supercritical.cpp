#include <doctest.h>

#include <cmath>

#include "bmc/moment_oracle.hpp"
#include "bmc/stat_tests.hpp"
#include "bmc/supercritical.hpp"

using namespace bmc;

namespace {

// E[M_n^2] for f(x) = x from the second-moment formula specialized to the
// projected observable, reduced by hand to geometric sums.
double martingale_second_moment_x(double a, double sigma, double x0, int n) {
    const double sa2 = sigma * sigma / (1.0 - a * a);
    const double r = 2.0 * a * a;
    const double dx = x0 * x0 - sa2;
    double total = std::pow(r, -n) * (sa2 + std::pow(a, 2 * n) * dx);
    for (int k = 0; k < n; ++k)
        total += std::pow(r, k - n) * a * a *
                 (sa2 + std::pow(a, 2 * (n - k - 1)) * dx);
    return total;
}

SimulationConfig base_config(const BarKernel& kernel, int depth, int reps,
                             std::uint64_t seed) {
    SimulationConfig sim;
    sim.kernel = &kernel;
    sim.depth = depth;
    sim.replicates = reps;
    sim.initial = InitialDistribution::point(1.0);
    sim.master_seed = seed;
    sim.threads = 2;
    return sim;
}

} // namespace

TEST_CASE("martingale second moment: formula vs generic oracle") {
    const BarKernel k(0.8, 1.0);
    const Observable rf = project_R(k.identity());
    CHECK(martingale_second_moment_x(0.8, 1.0, 1.0, 1) ==
          doctest::Approx(1.78125).epsilon(1e-13));
    for (int n : {1, 2, 3, 8}) {
        const double via_oracle = std::pow(2.0 * 0.8, -2 * n) *
                                  second_moment_generation(rf, n, 1.0, k);
        CHECK(via_oracle ==
              doctest::Approx(martingale_second_moment_x(0.8, 1.0, 1.0, n))
                  .epsilon(1e-10));
    }
}

TEST_CASE("martingale mean and L2 boundedness") {
    const BarKernel k(0.8, 1.0);
    const auto tracks = track_martingale(base_config(k, 10, 800, 99), k,
                                         k.identity());
    REQUIRE(tracks.size() == 800);
    for (int g = 1; g <= 10; ++g) {
        std::vector<double> vals;
        vals.reserve(tracks.size());
        for (const MartingaleTrack& t : tracks) vals.push_back(t.values[g]);
        const SampleSummary s = empirical_summary(vals);
        CHECK(std::fabs(s.mean - 1.0) <= 4.0 * std::sqrt(s.variance / 800.0));
        // ensemble second moment stays near the closed form, which is bounded
        const double want = martingale_second_moment_x(0.8, 1.0, 1.0, g);
        double m2 = 0.0;
        for (double v : vals) m2 += v * v;
        m2 /= double(vals.size());
        CHECK(std::fabs(m2 - want) <= 5.0 * s.variance_stderr + 0.05 * want);
    }
}

TEST_CASE("even observables give an identically zero martingale") {
    const BarKernel k(0.8, 1.0);
    const auto tracks =
        track_martingale(base_config(k, 6, 20, 7), k, k.square_centered());
    for (const MartingaleTrack& t : tracks)
        for (double v : t.values) CHECK(v == 0.0);
}

TEST_CASE("negative a alternating martingale keeps its mean") {
    const BarKernel k(-0.8, 1.0);
    const auto tracks =
        track_martingale(base_config(k, 8, 600, 13), k, k.identity());
    std::vector<double> finals;
    for (const MartingaleTrack& t : tracks) finals.push_back(t.final_value);
    const SampleSummary s = empirical_summary(finals);
    CHECK(std::fabs(s.mean - 1.0) <= 4.0 * std::sqrt(s.variance / 600.0));
}

TEST_CASE("martingale regression slope is one") {
    const BarKernel k(0.85, 1.0);
    const auto tracks =
        track_martingale(base_config(k, 9, 1000, 2718), k, k.identity());
    std::vector<double> prev, cur;
    for (const MartingaleTrack& t : tracks) {
        prev.push_back(t.values[8]);
        cur.push_back(t.values[9]);
    }
    const LinearFit fit = linear_fit(prev, cur);
    CHECK(std::fabs(fit.slope - 1.0) <= 4.0 * fit.slope_stderr);
}

TEST_CASE("tree to generation ratio approaches 2a/(2a-1)") {
    const BarKernel k(0.8, 1.0);
    const RatioDiagnostic d =
        ratio_diagnostic(base_config(k, 12, 400, 31), k, k.identity());
    CHECK(std::fabs(d.median - 8.0 / 3.0) < 0.2);
    CHECK(d.excluded < 40);

    const BarKernel k9(0.9, 1.0);
    const RatioDiagnostic d9 =
        ratio_diagnostic(base_config(k9, 12, 400, 32), k9, k9.identity());
    CHECK(std::fabs(d9.median - 2.25) < 0.2);
}

TEST_CASE("degenerate and wrong-regime inputs are rejected") {
    const BarKernel k(0.8, 1.0);
    const BarKernel sub(0.5, 1.0);
    const BarKernel neg(-0.8, 1.0);
    CHECK_THROWS_AS(
        ratio_diagnostic(base_config(sub, 6, 10, 1), sub, sub.identity()),
        std::domain_error);
    CHECK_THROWS_AS(
        track_martingale(base_config(sub, 6, 10, 1), sub, sub.identity()),
        std::domain_error);
    CHECK_THROWS_AS(
        ratio_diagnostic(base_config(neg, 6, 10, 1), neg, neg.identity()),
        std::domain_error);
    CHECK_THROWS_AS(
        ratio_diagnostic(base_config(k, 6, 10, 1), k, k.square_centered()),
        std::domain_error);
    const ObservableSequence seq = ObservableSequence::single(neg.identity());
    CHECK_THROWS_AS(
        normalized_functional_residual(base_config(neg, 6, 10, 1), neg, seq, 3),
        std::domain_error);
    CHECK_THROWS_AS(normalized_functional_residual(
                        base_config(k, 6, 10, 1), k,
                        ObservableSequence::single(k.identity()), 6),
                    std::invalid_argument);
}

TEST_CASE("residual spread shrinks with depth") {
    const BarKernel k(0.8, 1.0);

    // pure first-eigenspace observable: the deep residual vanishes exactly
    const ObservableSequence fx = ObservableSequence::single(k.identity());
    const ResidualDiagnostic rx =
        normalized_functional_residual(base_config(k, 10, 300, 404), k, fx, 5);
    CHECK(rx.iqr_deep == 0.0);
    CHECK(rx.iqr_shallow > 0.0);

    // mixed observable keeps a genuine remainder at depth
    const Observable mixed = add(k.identity(), scaled(k.hermite(3), 1.5));
    const ObservableSequence fm = ObservableSequence::single(mixed);
    const ResidualDiagnostic rm =
        normalized_functional_residual(base_config(k, 10, 300, 405), k, fm, 5);
    CHECK(rm.iqr_deep > 0.0);
    CHECK(rm.iqr_deep < rm.iqr_shallow);
}

TEST_CASE("all-even sequences: the normalized functional itself shrinks") {
    const BarKernel k(0.8, 1.0);
    const ObservableSequence seq =
        ObservableSequence::constant(k.square_centered());
    // R f = 0, so the residual is the scaled functional itself
    const ResidualDiagnostic r =
        normalized_functional_residual(base_config(k, 12, 300, 808), k, seq, 6);
    CHECK(r.iqr_deep < r.iqr_shallow);
    CHECK(std::fabs(quantile(r.deep, 0.5)) <
          std::fabs(quantile(r.shallow, 0.5)) + r.iqr_shallow);
}

TEST_CASE("combined report agrees with the standalone diagnostics") {
    const BarKernel k(0.8, 1.0);
    const ObservableSequence seq = ObservableSequence::single(k.identity());
    const SupercriticalReport rep =
        run_supercritical(base_config(k, 9, 200, 55), k, seq, 4);
    const auto tracks =
        track_martingale(base_config(k, 9, 200, 55), k, k.identity());
    REQUIRE(rep.tracks.size() == tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i)
        CHECK(rep.tracks[i].final_value == tracks[i].final_value);
    const RatioDiagnostic ratio =
        ratio_diagnostic(base_config(k, 9, 200, 55), k, k.identity());
    CHECK(rep.ratio.median == ratio.median);
}
