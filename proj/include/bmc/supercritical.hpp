#pragma once

#include "bmc/simulator.hpp"

// Super-critical diagnostics: the normalized martingale
// M_n = (2a)^{-n} M_{G_n}(R f), its limit surrogate, the tree/generation
// ratio, and the residual of the normalized sequence functional.

namespace bmc {

struct MartingaleTrack {
    std::vector<double> values; // M_0 .. M_n
    double final_value = 0.0;
};

// Per-replicate martingale tracks; needs 2 a^2 > 1.
std::vector<MartingaleTrack> track_martingale(const SimulationConfig& config,
                                              const BarKernel& kernel,
                                              const Observable& f);

struct RatioDiagnostic {
    std::vector<double> ratios; // retained replicates only
    std::vector<double> raw;    // one per replicate, NaN where excluded
    double median = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
    std::size_t excluded = 0;
    double floor = 0.0;
};

// Distribution of M_{T_n}(f~) / M_{G_n}(f~); replicates whose denominator is
// below 1e-3 of its ensemble spread are excluded and counted. Needs a > 0 and
// R f != 0 (an even f makes the limit ratio meaningless).
RatioDiagnostic ratio_diagnostic(const SimulationConfig& config,
                                 const BarKernel& kernel, const Observable& f);

struct ResidualDiagnostic {
    int depth_shallow = 0;
    int depth_deep = 0;
    std::vector<double> shallow; // per-replicate residuals at each depth
    std::vector<double> deep;
    double iqr_shallow = 0.0;
    double iqr_deep = 0.0;
};

// Residual of (2 a^2)^{-d/2} N_{d,O}(f) against the martingale prediction,
// using the deepest-level martingale value as the limit surrogate; evaluated
// at depth_shallow and at config.depth from the same replicates. Needs a > 0.
ResidualDiagnostic normalized_functional_residual(const SimulationConfig& config,
                                                  const BarKernel& kernel,
                                                  const ObservableSequence& seq,
                                                  int depth_shallow);

// All three diagnostics from a single simulation; the martingale and the
// ratio refer to the first sequence entry. The ratio is skipped (and flagged)
// when that entry has no first eigen-component.
struct SupercriticalReport {
    std::vector<MartingaleTrack> tracks;
    bool ratio_defined = false;
    RatioDiagnostic ratio;
    ResidualDiagnostic residual;
};

SupercriticalReport run_supercritical(const SimulationConfig& config,
                                      const BarKernel& kernel,
                                      const ObservableSequence& seq,
                                      int depth_shallow);

} // namespace bmc
