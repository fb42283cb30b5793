#include "bmc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace bmc {

std::size_t Ensemble::size() const {
    std::size_t n = 0;
    for (const Segment& s : segments) n += s.records.size();
    return n;
}

bool Ensemble::complete(int total) const {
    int expect = 0;
    for (const Segment& s : segments) {
        if (s.first != expect) return false;
        expect += static_cast<int>(s.records.size());
    }
    return expect == total;
}

const ReplicateStatistics& Ensemble::at(int rep) const {
    for (const Segment& s : segments) {
        if (rep >= s.first && rep < s.first + static_cast<int>(s.records.size()))
            return s.records[rep - s.first];
    }
    throw std::out_of_range("replicate index not present in ensemble");
}

void Ensemble::merge(Ensemble&& other) {
    if (segments.empty()) depth = other.depth;
    if (other.depth != depth && !other.segments.empty())
        throw std::invalid_argument("cannot merge ensembles of different depth");
    for (Segment& s : other.segments) segments.push_back(std::move(s));
    std::sort(segments.begin(), segments.end(),
              [](const Segment& a, const Segment& b) { return a.first < b.first; });
    // check disjointness, then coalesce adjacent ranges
    std::vector<Segment> merged;
    for (Segment& s : segments) {
        if (!merged.empty()) {
            Segment& prev = merged.back();
            const int prev_end = prev.first + static_cast<int>(prev.records.size());
            if (s.first < prev_end)
                throw std::invalid_argument("overlapping replicate ranges");
            if (s.first == prev_end) {
                for (ReplicateStatistics& r : s.records)
                    prev.records.push_back(std::move(r));
                continue;
            }
        }
        merged.push_back(std::move(s));
    }
    segments = std::move(merged);
}

std::vector<double> Ensemble::collect(
    const std::function<double(const ReplicateStatistics&)>& f) const {
    std::vector<double> out;
    out.reserve(size());
    for (const Segment& s : segments)
        for (const ReplicateStatistics& r : s.records) out.push_back(f(r));
    return out;
}

namespace {

struct LevelAccumulator {
    const std::vector<double>* coeffs = nullptr;
    KahanSum sum;
};

// one replicate, streaming two generations
void simulate_one(const SimulationConfig& cfg,
                  const std::vector<Observable>& observables,
                  const ObservableSequence* sequence, int rep,
                  std::vector<double>& cur, std::vector<double>& next,
                  ReplicateStatistics& out) {
    const int n = cfg.depth;
    const auto* bar = dynamic_cast<const BarKernel*>(cfg.kernel);
    const std::size_t n_obs = observables.size();

    double scale = 0.0;
    int max_deg = 0;
    for (const Observable& f : observables) {
        if (scale == 0.0) scale = f.scale();
        if (f.scale() != scale)
            throw std::invalid_argument("tracked observables must share a basis");
        max_deg = std::max(max_deg, f.degree());
    }
    if (sequence) {
        if (scale == 0.0) scale = sequence->scale();
        if (sequence->scale() != scale)
            throw std::invalid_argument("sequence must share the observables' basis");
        for (int l = 0; l <= std::min(n, sequence->support()); ++l)
            max_deg = std::max(max_deg, sequence->entry(l).degree());
    }

    RngStream rng(cfg.master_seed, static_cast<std::uint64_t>(rep));

    double x0 = cfg.initial.x0;
    if (cfg.initial.kind == InitialDistribution::Kind::stationary) {
        const auto mu = cfg.kernel->invariant_measure();
        if (!mu)
            throw std::invalid_argument(
                "kernel has no closed-form invariant law; use a point start");
        x0 = mu->mean + std::sqrt(mu->variance) * rng.gaussian();
    }

    out.m_gen.assign(n_obs, std::vector<double>(n + 1, 0.0));
    out.m_tree.assign(n_obs, 0.0);
    if (bar) out.martingale_track.assign(n_obs, std::vector<double>(n + 1, 0.0));
    out.has_n_functional = sequence != nullptr;

    std::vector<LevelAccumulator> accums(n_obs + 1);
    std::vector<double> seq_gen_sum(sequence ? n + 1 : 0, 0.0);
    std::vector<double> hvals(max_deg + 1);
    const double inv_scale = scale > 0.0 ? 1.0 / scale : 0.0;

    cur.clear();
    cur.push_back(x0);

    const double ka = bar ? bar->a() : 0.0;
    const double ksigma = bar ? bar->sigma() : 0.0;

    for (int g = 0; g <= n; ++g) {
        // assemble this level's evaluation list: tracked observables plus the
        // sequence entry feeding generation g (entry index n - g); duplicates
        // reuse the same accumulated value
        std::size_t n_eval = n_obs;
        for (std::size_t j = 0; j < n_obs; ++j) {
            accums[j].coeffs = &observables[j].coeffs();
            accums[j].sum = KahanSum{};
        }
        int seq_slot = -1;
        if (sequence) {
            const Observable& e = sequence->entry(n - g);
            if (!e.is_zero()) {
                for (std::size_t j = 0; j < n_obs; ++j)
                    if (*accums[j].coeffs == e.coeffs()) {
                        seq_slot = static_cast<int>(j);
                        break;
                    }
                if (seq_slot < 0) {
                    seq_slot = static_cast<int>(n_eval);
                    accums[n_eval].coeffs = &e.coeffs();
                    accums[n_eval].sum = KahanSum{};
                    ++n_eval;
                }
            }
        }

        KahanSum sum_x;
        for (const double x : cur) {
            sum_x.add(x);
            if (n_eval > 0 && max_deg > 0) {
                hermite_values(x * inv_scale, max_deg, hvals);
                for (std::size_t j = 0; j < n_eval; ++j) {
                    const std::vector<double>& c = *accums[j].coeffs;
                    double v = c[0];
                    for (std::size_t m = 1; m < c.size(); ++m)
                        v += c[m] * hvals[m];
                    accums[j].sum.add(v);
                }
            } else {
                for (std::size_t j = 0; j < n_eval; ++j)
                    accums[j].sum.add((*accums[j].coeffs)[0]);
            }
        }

        const double gen_count = std::ldexp(1.0, g); // 2^g
        for (std::size_t j = 0; j < n_obs; ++j) {
            // store the centered sum M(f - <mu,f>)
            out.m_gen[j][g] =
                accums[j].sum.value() - gen_count * observables[j].coeff(0);
            if (bar) {
                const double r_coeff = observables[j].coeff(1) * inv_scale;
                out.martingale_track[j][g] =
                    std::pow(2.0 * ka, -g) * r_coeff * sum_x.value();
            }
        }
        if (sequence && seq_slot >= 0) {
            const Observable& e = sequence->entry(n - g);
            seq_gen_sum[g] = accums[seq_slot].sum.value() - gen_count * e.coeff(0);
        }

        if (g == n) break;

        // sample generation g+1
        next.resize(cur.size() * 2);
        if (bar) {
            for (std::size_t i = 0; i < cur.size(); ++i) {
                const double mean = ka * cur[i];
                auto [g0, g1] = rng.gaussian_pair();
                next[2 * i] = mean + ksigma * g0;
                next[2 * i + 1] = mean + ksigma * g1;
            }
        } else {
            for (std::size_t i = 0; i < cur.size(); ++i) {
                auto [y, z] = cfg.kernel->sample_children(cur[i], rng);
                next[2 * i] = y;
                next[2 * i + 1] = z;
            }
        }
        cur.swap(next);
    }

    for (std::size_t j = 0; j < n_obs; ++j) {
        KahanSum tree;
        for (int g = 0; g <= n; ++g) tree.add(out.m_gen[j][g]);
        out.m_tree[j] = tree.value();
    }
    if (sequence) {
        KahanSum acc;
        for (int g = 0; g <= n; ++g) acc.add(seq_gen_sum[g]);
        out.n_functional = acc.value() / std::sqrt(std::ldexp(1.0, n));
    }
}

void check_budget(const SimulationConfig& cfg,
                  const std::vector<Observable>& observables, int threads) {
    check_depth(cfg.depth);
    if (cfg.replicates < 1)
        throw std::invalid_argument("need at least one replicate");
    const double live =
        3.0 * std::ldexp(8.0, cfg.depth) * threads; // cur + next buffers
    const double records = 8.0 * double(cfg.replicates) *
                           double(cfg.depth + 1) *
                           (2.0 * double(observables.size()) + 1.0);
    if (live + records > double(cfg.memory_budget))
        throw std::runtime_error("estimated memory exceeds the configured budget");
}

} // namespace

Ensemble run_replicate_range(const SimulationConfig& config,
                             const std::vector<Observable>& observables,
                             const ObservableSequence* sequence, int first,
                             int count) {
    check_budget(config, observables, 1);
    Ensemble e;
    e.depth = config.depth;
    Ensemble::Segment seg;
    seg.first = first;
    seg.records.resize(count);
    std::vector<double> cur, next;
    cur.reserve(std::size_t{1} << config.depth);
    next.reserve(std::size_t{1} << config.depth);
    for (int r = 0; r < count; ++r) {
        if (config.cancel && config.cancel->load(std::memory_order_relaxed))
            throw RunCancelled();
        simulate_one(config, observables, sequence, first + r, cur, next,
                     seg.records[r]);
    }
    e.segments.push_back(std::move(seg));
    return e;
}

Ensemble run_replicates(const SimulationConfig& config,
                        const std::vector<Observable>& observables,
                        const ObservableSequence* sequence) {
    int threads = config.threads;
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min(threads, config.replicates);
    check_budget(config, observables, threads);

    if (threads == 1)
        return run_replicate_range(config, observables, sequence, 0,
                                   config.replicates);

    // contiguous chunks; replicate r always uses stream r, so the split is
    // invisible in the results
    std::vector<Ensemble> parts(threads);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const int base = config.replicates / threads;
    const int extra = config.replicates % threads;
    int start = 0;
    for (int t = 0; t < threads; ++t) {
        const int count = base + (t < extra ? 1 : 0);
        pool.emplace_back([&, t, start, count] {
            try {
                parts[t] = run_replicate_range(config, observables, sequence,
                                               start, count);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
        start += count;
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& err : errors)
        if (err) std::rethrow_exception(err);

    Ensemble all;
    for (Ensemble& p : parts) all.merge(std::move(p));
    return all;
}

bool n_functional_identity_check(const ReplicateStatistics& stats, int n,
                                 int obs_index) {
    if (!stats.has_n_functional ||
        obs_index >= static_cast<int>(stats.m_tree.size()))
        return false;
    const double tree_nodes = std::ldexp(2.0, n) - 1.0; // |T_n|
    const double expected = std::sqrt(2.0 - std::ldexp(1.0, -n)) *
                            stats.m_tree[obs_index] / std::sqrt(tree_nodes);
    const double diff = std::fabs(stats.n_functional - expected);
    return diff <= 1e-12 * std::max(1.0, std::fabs(stats.n_functional));
}

} // namespace bmc
