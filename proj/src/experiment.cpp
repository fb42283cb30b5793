#include "bmc/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "bmc/limit_variance.hpp"
#include "bmc/moment_oracle.hpp"
#include "bmc/simulator.hpp"
#include "bmc/stat_tests.hpp"
#include "bmc/supercritical.hpp"
#include "bmc/version.hpp"

namespace bmc {

namespace {

struct RegimeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// deadline watchdog driving the simulator's cooperative cancel flag
class Watchdog {
  public:
    explicit Watchdog(double seconds) {
        deadline_ = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(seconds));
        worker_ = std::thread([this] {
            std::unique_lock<std::mutex> lock(mutex_);
            if (!cv_.wait_until(lock, deadline_, [this] { return stopped_; }))
                expired_.store(true);
        });
    }
    ~Watchdog() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stopped_ = true;
        }
        cv_.notify_all();
        worker_.join();
    }
    const std::atomic<bool>* flag() const { return &expired_; }
    bool expired() const { return expired_.load(); }

  private:
    std::chrono::steady_clock::time_point deadline_;
    std::atomic<bool> expired_{false};
    std::thread worker_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stopped_ = false;
};

class SummaryWriter {
  public:
    SummaryWriter(const std::filesystem::path& path, const ExperimentConfig& cfg,
                  std::string experiment)
        : out_(path, std::ios::binary), cfg_(cfg),
          experiment_(std::move(experiment)) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << kSummaryHeader << "\n";
    }

    void row(const std::string& statistic, std::optional<double> value,
             std::optional<double> target_exact = {},
             std::optional<double> target_asymptotic = {},
             std::optional<double> tolerance = {},
             std::optional<bool> pass = {}) {
        out_ << experiment_ << ',' << fmt(cfg_.a) << ',' << fmt(cfg_.sigma)
             << ',' << cfg_.depth << ',' << cfg_.replicates << ',' << cfg_.seed
             << ',' << statistic << ',';
        auto put = [&](const std::optional<double>& v) {
            if (v) out_ << fmt(*v);
            out_ << ',';
        };
        put(value);
        put(target_exact);
        put(target_asymptotic);
        put(tolerance);
        if (pass) out_ << (*pass ? '1' : '0');
        out_ << ',' << fmt_hash(cfg_.config_hash) << ',' << kVersion << "\n";
    }

    void partial_marker() { out_ << "# PARTIAL: runtime budget exceeded\n"; }

  private:
    std::ofstream out_;
    const ExperimentConfig& cfg_;
    std::string experiment_;
};

int regime_code(Regime r) {
    switch (r) {
        case Regime::sub_critical: return 0;
        case Regime::critical: return 1;
        case Regime::super_critical: return 2;
    }
    return -1;
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    return from(ConfigFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from(const ConfigFile& file) {
    ExperimentConfig cfg;
    cfg.a = file.get_double("kernel", "a", cfg.a);
    cfg.sigma = file.get_double("kernel", "sigma", cfg.sigma);
    cfg.regime = file.get_string("kernel", "regime", cfg.regime);

    cfg.observable_spec = file.get_string("observable", "f", cfg.observable_spec);
    cfg.sequence_mode = file.get_string("sequence", "mode", cfg.sequence_mode);

    cfg.depth = static_cast<int>(file.get_int("run", "depth", cfg.depth));
    cfg.replicates =
        static_cast<int>(file.get_int("run", "replicates", cfg.replicates));
    cfg.seed = static_cast<std::uint64_t>(file.get_int("run", "seed", 1));
    cfg.threads = static_cast<int>(file.get_int("run", "threads", cfg.threads));
    cfg.budget_seconds =
        file.get_double("run", "budget_seconds", cfg.budget_seconds);
    cfg.initial = file.get_string("run", "initial", cfg.initial);
    cfg.x0 = file.get_double("run", "x0", cfg.x0);

    cfg.oracle_x0 = file.get_doubles("oracle", "x0", cfg.oracle_x0);
    cfg.oracle_m = static_cast<int>(file.get_int("oracle", "m", cfg.oracle_m));

    cfg.variance_tol = file.get_double("variance", "tol", cfg.variance_tol);

    cfg.a_grid = file.get_doubles("sweep", "a_grid", cfg.a_grid);
    cfg.exponent_depth =
        static_cast<int>(file.get_int("sweep", "depth", cfg.exponent_depth));
    cfg.exponent_replicates = static_cast<int>(
        file.get_int("sweep", "replicates", cfg.exponent_replicates));

    cfg.shallow_depth = static_cast<int>(
        file.get_int("supercritical", "shallow_depth", cfg.shallow_depth));

    cfg.out_dir = file.get_string("output", "dir", cfg.out_dir);
    cfg.config_hash = file.hash();

    if (cfg.depth < 0 || cfg.depth > kMaxDepth)
        throw ConfigError("run.depth out of range");
    if (cfg.replicates < 1) throw ConfigError("run.replicates must be >= 1");
    if (cfg.initial != "stationary" && cfg.initial != "point")
        throw ConfigError("run.initial must be 'stationary' or 'point'");
    if (cfg.sequence_mode != "single" && cfg.sequence_mode != "constant")
        throw ConfigError("sequence.mode must be 'single' or 'constant'");
    return cfg;
}

Observable ExperimentConfig::make_observable(const BarKernel& kernel) const {
    const std::string& spec = observable_spec;
    if (spec == "identity") return kernel.identity();
    if (spec == "square-centered") return kernel.square_centered();
    if (spec.rfind("hermite:", 0) == 0) {
        const int m = std::stoi(spec.substr(8));
        if (m < 0 || m > kMaxDefaultDegree)
            throw ConfigError("hermite order out of range: " + spec);
        return kernel.hermite(m);
    }
    if (spec.rfind("coeffs:", 0) == 0) {
        std::string items = spec.substr(7);
        for (char& c : items)
            if (c == ',') c = ' ';
        std::istringstream in(items);
        std::vector<double> c;
        double v;
        while (in >> v) c.push_back(v);
        if (c.empty()) throw ConfigError("empty coefficient list");
        return Observable(kernel.sigma_a(), std::move(c));
    }
    throw ConfigError("unknown observable spec: " + spec);
}

ObservableSequence ExperimentConfig::make_sequence(const BarKernel& kernel) const {
    Observable f = make_observable(kernel);
    return sequence_mode == "constant" ? ObservableSequence::constant(std::move(f))
                                       : ObservableSequence::single(std::move(f));
}

Regime ExperimentConfig::resolved_regime(const BarKernel& kernel) const {
    const Regime actual = kernel.regime();
    if (regime == "auto") return actual;
    Regime wanted;
    if (regime == "sub" || regime == "sub-critical" || regime == "subcritical")
        wanted = Regime::sub_critical;
    else if (regime == "critical")
        wanted = Regime::critical;
    else if (regime == "super" || regime == "super-critical" ||
             regime == "supercritical")
        wanted = Regime::super_critical;
    else
        throw ConfigError("unknown regime: " + regime);
    if (wanted != actual)
        throw RegimeMismatch(std::string("config says ") + regime +
                             " but 2a^2 classifies the kernel as " +
                             regime_name(actual));
    return wanted;
}

namespace {

SimulationConfig make_sim(const ExperimentConfig& cfg, const BarKernel& kernel,
                          const Watchdog& dog) {
    SimulationConfig sim;
    sim.kernel = &kernel;
    sim.depth = cfg.depth;
    sim.replicates = cfg.replicates;
    sim.initial = cfg.initial == "point"
                      ? InitialDistribution::point(cfg.x0)
                      : InitialDistribution::stationary();
    sim.master_seed = cfg.seed;
    sim.threads = cfg.threads;
    sim.cancel = dog.flag();
    return sim;
}

void run_simulate(const ExperimentConfig& cfg, const Watchdog& dog,
                  const std::filesystem::path& dir) {
    const BarKernel kernel = cfg.make_kernel();
    const Observable f = cfg.make_observable(kernel);
    const ObservableSequence seq = cfg.make_sequence(kernel);
    const Ensemble ens =
        run_replicates(make_sim(cfg, kernel, dog), {f}, &seq);
    const int n = cfg.depth;

    std::ofstream reps(dir / "replicates.csv", std::ios::binary);
    reps << "replicate,n,statistic,value\n";
    int rep = 0;
    for (const Ensemble::Segment& seg : ens.segments)
        for (const ReplicateStatistics& r : seg.records) {
            reps << rep << ',' << n << ",m_gen_final," << fmt(r.m_gen[0][n])
                 << "\n";
            reps << rep << ',' << n << ",m_tree," << fmt(r.m_tree[0]) << "\n";
            reps << rep << ',' << n << ",n_functional," << fmt(r.n_functional)
                 << "\n";
            if (!r.martingale_track.empty())
                reps << rep << ',' << n << ",martingale_final,"
                     << fmt(r.martingale_track[0][n]) << "\n";
            ++rep;
        }

    SummaryWriter summary(dir / "summary.csv", cfg, "simulate");
    auto report = [&](const char* name, const std::vector<double>& v) {
        const SampleSummary s = empirical_summary(v);
        summary.row(std::string(name) + "_mean", s.mean);
        summary.row(std::string(name) + "_variance", s.variance);
    };
    report("m_gen_final",
           ens.collect([&](const ReplicateStatistics& r) { return r.m_gen[0][n]; }));
    report("m_tree",
           ens.collect([](const ReplicateStatistics& r) { return r.m_tree[0]; }));
    report("n_functional", ens.collect([](const ReplicateStatistics& r) {
               return r.n_functional;
           }));
    if (cfg.sequence_mode == "constant") {
        std::size_t ok = 0;
        for (const Ensemble::Segment& seg : ens.segments)
            for (const ReplicateStatistics& r : seg.records)
                ok += n_functional_identity_check(r, n) ? 1 : 0;
        const double frac = double(ok) / double(ens.size());
        summary.row("n_functional_identity_fraction", frac, 1.0, {}, {},
                    frac == 1.0);
    }
}

void run_oracle(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const BarKernel kernel = cfg.make_kernel();
    const Observable f = cfg.make_observable(kernel);
    const int n = cfg.depth;
    const int m = cfg.oracle_m;
    SummaryWriter summary(dir / "summary.csv", cfg, "oracle");
    for (double x : cfg.oracle_x0) {
        summary.row("mean_gen(x=" + fmt(x) + ")",
                    mean_generation(f, n, x, kernel));
        summary.row("second_gen(x=" + fmt(x) + ")",
                    second_moment_generation(f, n, x, kernel));
        summary.row("cross_gen(m=" + std::to_string(m) + ",x=" + fmt(x) + ")",
                    cross_moment(f, f, n, m, x, kernel));
    }
}

void run_variance(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const BarKernel kernel = cfg.make_kernel();
    const Observable f = cfg.make_observable(kernel);
    const ObservableSequence seq = cfg.make_sequence(kernel);
    const Regime regime = cfg.resolved_regime(kernel);
    if (regime == Regime::super_critical)
        throw RegimeMismatch(
            "no Gaussian limit variance in the super-critical regime");

    SummaryWriter summary(dir / "summary.csv", cfg, "variance");
    nlohmann::json js = nlohmann::json::array();
    auto emit = [&](const char* name, const VarianceReport& rep) {
        const bool ok = rep.tail_bound <= cfg.variance_tol && rep.value >= -1e-12;
        summary.row(name, rep.value, {}, {}, cfg.variance_tol, ok);
        js.push_back({{"statistic", name},
                      {"value", rep.value},
                      {"truncation_K", rep.truncation_K},
                      {"tail_bound", rep.tail_bound},
                      {"sigma1", rep.sigma1},
                      {"sigma2", rep.sigma2}});
    };
    if (regime == Regime::sub_critical) {
        emit("sigma_sub_G", sigma_sub_G(f, kernel, cfg.variance_tol));
        emit("sigma_sub_T", sigma_sub_T(f, kernel, cfg.variance_tol));
        emit("sigma_sub_sequence",
             sigma_sub_sequence(seq, kernel, cfg.variance_tol));
    } else {
        emit("sigma_crit_G", sigma_crit_G(f, kernel));
        emit("sigma_crit_T", sigma_crit_T(f, kernel));
        emit("sigma_crit_sequence",
             sigma_crit_sequence(seq, kernel, cfg.variance_tol));
    }
    std::ofstream(dir / "variance.json", std::ios::binary) << js.dump(2) << "\n";
}

void run_clt(const ExperimentConfig& cfg, const Watchdog& dog,
             const std::filesystem::path& dir) {
    const BarKernel kernel = cfg.make_kernel();
    const Regime regime = cfg.resolved_regime(kernel);
    if (regime == Regime::super_critical)
        throw RegimeMismatch("no central limit verdict in the super-critical "
                             "regime; use the supercritical subcommand");
    CltConfig cc;
    cc.kernel = &kernel;
    cc.f = cfg.make_observable(kernel);
    cc.depth = cfg.depth;
    cc.replicates = cfg.replicates;
    cc.seed = cfg.seed;
    cc.threads = cfg.threads;
    (void)dog; // simulation inside run_clt is budgeted by the caller's watchdog
    const CltReport rep = bmc::run_clt(cc, regime);

    SummaryWriter summary(dir / "summary.csv", cfg, "clt");
    const double ks_crit =
        kKolmogorovCritical1pc / std::sqrt(double(cfg.replicates));
    auto emit = [&](const char* prefix, const CltVerdict& v) {
        summary.row(std::string(prefix) + "_variance", v.empirical_variance,
                    v.target_variance_exact_n, v.target_variance_asymptotic,
                    rep.slack, v.pass_exact && v.pass_asymptotic);
        summary.row(std::string(prefix) + "_ks", v.ks_statistic, {}, {}, ks_crit,
                    v.pass_normality);
    };
    emit("G", rep.generation);
    emit("T", rep.tree);
}

void run_supercritical_cmd(const ExperimentConfig& cfg, const Watchdog& dog,
                           const std::filesystem::path& dir) {
    const BarKernel kernel = cfg.make_kernel();
    if (cfg.resolved_regime(kernel) != Regime::super_critical)
        throw RegimeMismatch("supercritical subcommand needs 2a^2 > 1");
    const ObservableSequence seq = cfg.make_sequence(kernel);
    const int shallow = cfg.shallow_depth >= 0 ? cfg.shallow_depth
                                               : std::max(cfg.depth - 6, 0);
    const SupercriticalReport rep = run_supercritical(
        make_sim(cfg, kernel, dog), kernel, seq, shallow);

    std::ofstream reps(dir / "supercritical.csv", std::ios::binary);
    reps << "replicate,n,M_n,ratio,residual\n";
    for (std::size_t r = 0; r < rep.tracks.size(); ++r) {
        reps << r << ',' << cfg.depth << ','
             << fmt(rep.tracks[r].final_value) << ',';
        if (rep.ratio_defined && !std::isnan(rep.ratio.raw[r]))
            reps << fmt(rep.ratio.raw[r]);
        reps << ',' << fmt(rep.residual.deep[r]) << "\n";
    }

    SummaryWriter summary(dir / "summary.csv", cfg, "supercritical");
    // ensemble mean of the final martingale value; for a point start the
    // expectation is R f(x0) at every level
    std::vector<double> finals;
    finals.reserve(rep.tracks.size());
    for (const MartingaleTrack& t : rep.tracks)
        finals.push_back(t.final_value);
    const SampleSummary s = empirical_summary(finals);
    summary.row("martingale_mean_final", s.mean);
    summary.row("martingale_var_final", s.variance);

    // martingale property: slope of M_n on M_{n-1} across the ensemble
    std::vector<double> prev;
    prev.reserve(rep.tracks.size());
    for (const MartingaleTrack& t : rep.tracks)
        prev.push_back(t.values[cfg.depth - 1]);
    const LinearFit fit = linear_fit(prev, finals);
    summary.row("martingale_slope", fit.slope, 1.0, {}, 4.0 * fit.slope_stderr,
                std::fabs(fit.slope - 1.0) <= 4.0 * fit.slope_stderr);

    if (rep.ratio_defined) {
        const double limit_ratio =
            2.0 * kernel.alpha() / (2.0 * kernel.alpha() - 1.0);
        summary.row("ratio_median", rep.ratio.median, {}, limit_ratio, 0.1,
                    std::fabs(rep.ratio.median - limit_ratio) <= 0.1);
        summary.row("ratio_q10", rep.ratio.q10);
        summary.row("ratio_q90", rep.ratio.q90);
        summary.row("ratio_excluded", double(rep.ratio.excluded));
    }
    summary.row("residual_iqr_shallow", rep.residual.iqr_shallow);
    summary.row("residual_iqr_deep", rep.residual.iqr_deep, {}, {}, {},
                rep.residual.iqr_deep < rep.residual.iqr_shallow);
}

void run_regimes(const ExperimentConfig& cfg, const Watchdog& dog,
                 const std::filesystem::path& dir) {
    SummaryWriter summary(dir / "summary.csv", cfg, "regimes");
    for (double a : cfg.a_grid) {
        const BarKernel kernel(a, cfg.sigma);
        const Observable f = kernel.identity();
        const Regime label = kernel.regime();
        const std::string tag = "[a=" + fmt(a) + "]";
        summary.row("regime_code" + tag, double(regime_code(label)));

        // measured normalization exponent from the growth of Var(M_{G_n})
        // between two depths of the same replicates
        const int n2 = cfg.exponent_depth;
        const int n1 = std::max(n2 - 4, 1);
        SimulationConfig sim;
        sim.kernel = &kernel;
        sim.depth = n2;
        sim.replicates = cfg.exponent_replicates;
        sim.initial = InitialDistribution::stationary();
        sim.master_seed = cfg.seed;
        sim.threads = cfg.threads;
        sim.cancel = dog.flag();
        const Ensemble ens = run_replicates(sim, {f}, nullptr);
        const SampleSummary s1 = empirical_summary(ens.collect(
            [&](const ReplicateStatistics& r) { return r.m_gen[0][n1]; }));
        const SampleSummary s2 = empirical_summary(ens.collect(
            [&](const ReplicateStatistics& r) { return r.m_gen[0][n2]; }));
        const double measured =
            std::log2(s2.variance / s1.variance) / (2.0 * (n2 - n1));
        const double theory = label == Regime::super_critical
                                  ? std::log2(2.0 * kernel.alpha())
                                  : 0.5;
        summary.row("normalization_exponent" + tag, measured, theory, {}, 0.08,
                    std::fabs(measured - theory) <= 0.08);

        if (label == Regime::sub_critical) {
            const double gap = 1.0 - 2.0 * a * a;
            const double product = sigma_sub_G(f, kernel).value * gap;
            const double target = cfg.sigma * cfg.sigma;
            summary.row("sigma_sub_G_times_gap" + tag, product, target, {},
                        0.01, std::fabs(product - target) <= 0.01 * target);
        }
    }
}

} // namespace

int run_experiment(const std::string& subcommand, const ExperimentConfig& cfg,
                   std::ostream& log) {
    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        log << "error: cannot create output directory " << dir << "\n";
        return exit_config_error;
    }

    Watchdog dog(cfg.budget_seconds);
    try {
        if (subcommand == "simulate")
            run_simulate(cfg, dog, dir);
        else if (subcommand == "oracle")
            run_oracle(cfg, dir);
        else if (subcommand == "variance")
            run_variance(cfg, dir);
        else if (subcommand == "clt")
            run_clt(cfg, dog, dir);
        else if (subcommand == "supercritical")
            run_supercritical_cmd(cfg, dog, dir);
        else if (subcommand == "regimes")
            run_regimes(cfg, dog, dir);
        else {
            log << "error: unknown subcommand '" << subcommand << "'\n";
            return exit_config_error;
        }
    } catch (const RunCancelled&) {
        std::ofstream out(dir / "summary.csv", std::ios::binary | std::ios::app);
        out << "# PARTIAL: runtime budget exceeded\n";
        log << "error: runtime budget of " << cfg.budget_seconds
            << " s exceeded; partial output marked\n";
        return exit_budget_exceeded;
    } catch (const RegimeMismatch& e) {
        log << "error: regime mismatch: " << e.what() << "\n";
        return exit_regime_mismatch;
    } catch (const ConfigError& e) {
        log << "error: config: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_failure;
    }
    if (dog.expired()) {
        log << "warning: finished after the budget elapsed\n";
        return exit_budget_exceeded;
    }
    return exit_ok;
}

} // namespace bmc
