#pragma once

#include <iosfwd>
#include <string>

#include "bmc/config.hpp"
#include "bmc/hermite.hpp"
#include "bmc/kernel.hpp"

// Experiment orchestration shared by the CLI: config -> run -> CSV/JSON.

namespace bmc {

enum ExitCode {
    exit_ok = 0,
    exit_failure = 1,
    exit_config_error = 2,
    exit_regime_mismatch = 3,
    exit_budget_exceeded = 4,
};

// Fixed summary schema; one row per reported statistic.
inline constexpr const char* kSummaryHeader =
    "experiment,a,sigma,n,R,seed,statistic,value,target_exact,"
    "target_asymptotic,tolerance,pass,config_hash,version";

struct ExperimentConfig {
    // kernel
    double a = 0.5;
    double sigma = 1.0;
    std::string regime = "auto"; // auto | sub | critical | super

    // observable and sequence
    std::string observable_spec = "identity";
    std::string sequence_mode = "single"; // single | constant

    // run parameters
    int depth = 10;
    int replicates = 1000;
    std::uint64_t seed = 1;
    int threads = 1;
    double budget_seconds = 120.0;
    std::string initial = "stationary"; // stationary | point
    double x0 = 0.0;

    // oracle inputs
    std::vector<double> oracle_x0 = {0.0, 1.0};
    int oracle_m = 0;

    // variance inputs
    double variance_tol = 1e-10;

    // regime sweep inputs
    std::vector<double> a_grid = {0.3, 0.5, 0.7071067811865476, 0.8, 0.9};
    int exponent_depth = 12;
    int exponent_replicates = 256;

    // super-critical inputs
    int shallow_depth = -1; // default: depth - 6

    std::string out_dir = "out";
    std::uint64_t config_hash = 0;

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from(const ConfigFile& file);

    BarKernel make_kernel() const { return BarKernel(a, sigma); }
    Observable make_observable(const BarKernel& kernel) const;
    ObservableSequence make_sequence(const BarKernel& kernel) const;
    // resolves "auto" and cross-checks an explicit regime against 2a^2
    Regime resolved_regime(const BarKernel& kernel) const;
};

// Dispatch one subcommand; returns an ExitCode. Diagnostics go to `log`.
int run_experiment(const std::string& subcommand, const ExperimentConfig& cfg,
                   std::ostream& log);

} // namespace bmc
