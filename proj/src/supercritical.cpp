#include "bmc/supercritical.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmc/stat_tests.hpp"

namespace bmc {

namespace {

void require_super(const BarKernel& kernel, const char* who) {
    if (kernel.regime() != Regime::super_critical)
        throw std::domain_error(std::string(who) +
                                " needs the super-critical regime 2a^2 > 1");
}

SimulationConfig with_kernel(const SimulationConfig& config,
                             const BarKernel& kernel) {
    SimulationConfig c = config;
    c.kernel = &kernel;
    return c;
}

std::vector<MartingaleTrack> tracks_from(const Ensemble& ens, int obs) {
    std::vector<MartingaleTrack> out;
    out.reserve(ens.size());
    for (const Ensemble::Segment& seg : ens.segments)
        for (const ReplicateStatistics& r : seg.records) {
            MartingaleTrack t;
            t.values = r.martingale_track[obs];
            t.final_value = t.values.back();
            out.push_back(std::move(t));
        }
    return out;
}

RatioDiagnostic ratio_from(const Ensemble& ens, int n, int obs) {
    const std::vector<double> denom = ens.collect(
        [&](const ReplicateStatistics& r) { return r.m_gen[obs][n]; });
    const SampleSummary s = empirical_summary(denom);

    RatioDiagnostic out;
    out.floor = 1e-3 * std::sqrt(s.variance);
    for (const Ensemble::Segment& seg : ens.segments)
        for (const ReplicateStatistics& r : seg.records) {
            if (std::fabs(r.m_gen[obs][n]) <= out.floor) {
                ++out.excluded;
                out.raw.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            const double ratio = r.m_tree[obs] / r.m_gen[obs][n];
            out.ratios.push_back(ratio);
            out.raw.push_back(ratio);
        }
    if (out.ratios.empty())
        throw std::runtime_error(
            "all replicates fell below the denominator floor (is R f = 0?)");
    out.median = quantile(out.ratios, 0.5);
    out.q10 = quantile(out.ratios, 0.1);
    out.q90 = quantile(out.ratios, 0.9);
    return out;
}

ResidualDiagnostic residual_from(const Ensemble& ens, const BarKernel& kernel,
                                 const ObservableSequence& seq,
                                 int depth_shallow, int n2) {
    const bool const_tail =
        seq.tail() == ObservableSequence::Tail::constant_last;
    const double two_alpha = 2.0 * kernel.alpha();

    auto residual_at = [&](const ReplicateStatistics& r, int d) {
        // N_{d,O}(f) from the per-entry generation sums
        KahanSum acc;
        for (int g = 0; g <= d; ++g) {
            const int l = d - g;
            const int idx =
                l < seq.support() ? l : (const_tail ? seq.support() - 1 : -1);
            if (idx >= 0) acc.add(r.m_gen[idx][g]);
        }
        const double n_func = acc.value() / std::sqrt(std::ldexp(1.0, d));
        const double scaled =
            std::pow(2.0 * kernel.a() * kernel.a(), -0.5 * d) * n_func;

        // martingale prediction sum_l (2a)^{-l} M_surrogate(f_l)
        double predict = 0.0;
        for (int l = 0; l < seq.support(); ++l)
            predict += std::pow(two_alpha, -l) * r.martingale_track[l][n2];
        if (const_tail) {
            const double m_last = r.martingale_track[seq.support() - 1][n2];
            predict += m_last * std::pow(two_alpha, -seq.support()) /
                       (1.0 - 1.0 / two_alpha);
        }
        return scaled - predict;
    };

    ResidualDiagnostic out;
    out.depth_shallow = depth_shallow;
    out.depth_deep = n2;
    for (const Ensemble::Segment& seg : ens.segments)
        for (const ReplicateStatistics& r : seg.records) {
            out.shallow.push_back(residual_at(r, depth_shallow));
            out.deep.push_back(residual_at(r, n2));
        }
    out.iqr_shallow = quantile(out.shallow, 0.75) - quantile(out.shallow, 0.25);
    out.iqr_deep = quantile(out.deep, 0.75) - quantile(out.deep, 0.25);
    return out;
}

std::vector<Observable> sequence_entries(const ObservableSequence& seq) {
    std::vector<Observable> tracked;
    for (int l = 0; l < seq.support(); ++l) tracked.push_back(seq.entry(l));
    return tracked;
}

} // namespace

std::vector<MartingaleTrack> track_martingale(const SimulationConfig& config,
                                              const BarKernel& kernel,
                                              const Observable& f) {
    require_super(kernel, "track_martingale");
    const Ensemble ens =
        run_replicates(with_kernel(config, kernel), {f}, nullptr);
    return tracks_from(ens, 0);
}

RatioDiagnostic ratio_diagnostic(const SimulationConfig& config,
                                 const BarKernel& kernel, const Observable& f) {
    require_super(kernel, "ratio_diagnostic");
    if (!(kernel.a() > 0.0))
        throw std::domain_error(
            "ratio_diagnostic needs a > 0 (the limit ratio assumes theta = 1)");
    if (project_R(f).is_zero())
        throw std::domain_error(
            "ratio_diagnostic degenerates when R f = 0 (limit is 0)");
    const Ensemble ens =
        run_replicates(with_kernel(config, kernel), {f}, nullptr);
    return ratio_from(ens, config.depth, 0);
}

ResidualDiagnostic normalized_functional_residual(const SimulationConfig& config,
                                                  const BarKernel& kernel,
                                                  const ObservableSequence& seq,
                                                  int depth_shallow) {
    require_super(kernel, "normalized_functional_residual");
    if (!(kernel.a() > 0.0))
        throw std::domain_error(
            "normalized_functional_residual needs a > 0 (theta = 1)");
    if (!(depth_shallow >= 0 && depth_shallow < config.depth))
        throw std::invalid_argument("need 0 <= shallow depth < config depth");
    const Ensemble ens = run_replicates(with_kernel(config, kernel),
                                        sequence_entries(seq), &seq);
    return residual_from(ens, kernel, seq, depth_shallow, config.depth);
}

SupercriticalReport run_supercritical(const SimulationConfig& config,
                                      const BarKernel& kernel,
                                      const ObservableSequence& seq,
                                      int depth_shallow) {
    require_super(kernel, "run_supercritical");
    if (!(kernel.a() > 0.0))
        throw std::domain_error("run_supercritical needs a > 0 (theta = 1)");
    if (!(depth_shallow >= 0 && depth_shallow < config.depth))
        throw std::invalid_argument("need 0 <= shallow depth < config depth");
    const Ensemble ens = run_replicates(with_kernel(config, kernel),
                                        sequence_entries(seq), &seq);
    SupercriticalReport rep;
    rep.tracks = tracks_from(ens, 0);
    if (!project_R(seq.entry(0)).is_zero()) {
        rep.ratio = ratio_from(ens, config.depth, 0);
        rep.ratio_defined = true;
    }
    rep.residual = residual_from(ens, kernel, seq, depth_shallow, config.depth);
    return rep;
}

} // namespace bmc
