#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <vector>

#include "bmc/kernel.hpp"
#include "bmc/tree.hpp"

// Level-streaming simulation of a bifurcating chain. Only two generations
// are ever alive per replicate; additive functionals are accumulated online
// with compensated summation.

namespace bmc {

struct InitialDistribution {
    enum class Kind { point_mass, stationary };
    Kind kind = Kind::stationary;
    double x0 = 0.0;

    static InitialDistribution point(double x) {
        return {Kind::point_mass, x};
    }
    static InitialDistribution stationary() { return {Kind::stationary, 0.0}; }
};

struct SimulationConfig {
    const Kernel* kernel = nullptr;
    int depth = 0;
    int replicates = 1;
    InitialDistribution initial = InitialDistribution::stationary();
    std::uint64_t master_seed = 0;
    int threads = 1; // 0 = hardware concurrency
    std::size_t memory_budget = std::size_t{4} << 30;
    const std::atomic<bool>* cancel = nullptr;
};

// Per-replicate functionals. m_gen[j][g] = M_{G_g}(f_j - <mu,f_j>);
// martingale_track[j][g] = (2a)^{-g} M_{G_g}(R f_j) (BAR kernels only).
struct ReplicateStatistics {
    std::vector<std::vector<double>> m_gen;
    std::vector<double> m_tree;
    std::vector<std::vector<double>> martingale_track;
    double n_functional = 0.0;
    bool has_n_functional = false;
};

class Ensemble {
  public:
    struct Segment {
        int first = 0;
        std::vector<ReplicateStatistics> records;
    };

    int depth = 0;
    std::vector<Segment> segments;

    std::size_t size() const;
    // true when segments tile [0, R) exactly
    bool complete(int total) const;
    const ReplicateStatistics& at(int rep) const;
    // union of disjoint replicate ranges; adjacent segments coalesce, so the
    // result is independent of merge order
    void merge(Ensemble&& other);

    // values in replicate order
    std::vector<double> collect(
        const std::function<double(const ReplicateStatistics&)>& f) const;
};

// Thrown when a cooperative cancel flag fires mid-run.
struct RunCancelled : std::runtime_error {
    RunCancelled() : std::runtime_error("simulation cancelled") {}
};

// R independent replicates; identical (config, master_seed) give identical
// results for any thread count.
Ensemble run_replicates(const SimulationConfig& config,
                        const std::vector<Observable>& observables,
                        const ObservableSequence* sequence = nullptr);

// Contiguous replicate range [first, first + count), single-threaded.
Ensemble run_replicate_range(const SimulationConfig& config,
                             const std::vector<Observable>& observables,
                             const ObservableSequence* sequence, int first,
                             int count);

// For constant-tail sequences, N_{n,O}(f) must equal
// sqrt(2 - 2^-n) |T_n|^{-1/2} M_{T_n}(f~) up to 1e-12 relative.
bool n_functional_identity_check(const ReplicateStatistics& stats, int n,
                                 int obs_index = 0);

struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

} // namespace bmc
