#include "clogsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "clogsim/fast_engine.hpp"
#include "clogsim/parallel.hpp"
#include "clogsim/rng.hpp"

namespace clogsim {

namespace {

ParticleRecord to_record(const ParticleOutcome& o) {
    return {o.index, o.fate, o.freeze_site, o.froze_upon_arrival, o.min_site};
}

// Places one arrival and enforces the per-particle run invariants.
void place_checked(ClusterState& cluster, const ParticleOutcome& outcome) {
    if (!outcome.frozen()) return;
    if (outcome.freeze_site < 1)
        throw std::logic_error("particle " + std::to_string(outcome.index) + " froze at site " +
                               std::to_string(outcome.freeze_site));
    const Site before = cluster.frontier();
    apply_freeze(cluster, outcome);
    if (cluster.frontier() > before + 1) throw std::logic_error("frontier advanced by more than one site");
}

std::vector<int> profile_of(const ClusterState& cluster) {
    const auto counts = cluster.counts();
    return {counts.begin(), counts.begin() + (cluster.frontier() + 1)};
}

}  // namespace

RunResult run_to_blockage(const ModelParams& params, std::uint64_t run_seed, const RunOptions& options) {
    ClusterState cluster = init_cluster(params);
    Rng rng(run_seed);
    RunResult result;
    result.seed = run_seed;
    result.n = params.n;

    const std::uint64_t initial = params.initial_particles();
    std::uint64_t arrivals = 0;
    const bool halt = params.stop_on_blockage;
    while (!(halt && cluster.blocked()) && arrivals < params.max_particles) {
        const std::uint64_t index = initial + arrivals + 1;
        const ParticleOutcome outcome = run_particle_fast(index, cluster, params, rng);
        ++arrivals;
        if (outcome.escaped()) ++result.escaped_count;
        place_checked(cluster, outcome);
        if (options.record_events) result.events.push_back(to_record(outcome));
    }
    result.B = cluster.blockage_site();
    result.truncated = !result.B.has_value();
    result.particles_used = initial + arrivals;
    result.final_profile = profile_of(cluster);
    return result;
}

bool leftmost_blockage_holds(const RunResult& result, int n) {
    if (!result.B) return std::none_of(result.final_profile.begin(), result.final_profile.end(),
                                       [n](int c) { return c >= n; });
    const auto b = static_cast<std::size_t>(*result.B);
    if (b >= result.final_profile.size() || result.final_profile[b] != n) return false;
    return std::all_of(result.final_profile.begin(), result.final_profile.begin() + static_cast<std::ptrdiff_t>(b),
                       [n](int c) { return c < n; });
}

// --- S(k) -----------------------------------------------------------------

std::optional<bool> s_event_within_budget(ModelParams params, Site k, std::uint64_t budget, std::uint64_t run_seed) {
    params.stop_on_blockage = false;
    ClusterState cluster = init_cluster(params);
    if (cluster.count(k) == params.n) return true;
    // f(k) can only grow if f(k-1) can become positive, which needs k >= 1.
    if (k <= 0) return false;
    for (const auto& [site, count] : params.initial_occupancy)
        if (site > k && count == params.n) return false;

    Rng rng(run_seed);
    const std::uint64_t initial = params.initial_particles();
    for (std::uint64_t arrivals = 0; arrivals < budget; ++arrivals) {
        const ParticleOutcome outcome = run_particle_fast(initial + arrivals + 1, cluster, params, rng);
        place_checked(cluster, outcome);
        if (outcome.frozen() && cluster.count(outcome.freeze_site) == params.n) {
            if (outcome.freeze_site == k) return true;
            if (outcome.freeze_site > k) return false;
        }
    }
    return std::nullopt;
}

SEstimate estimate_S(const ModelParams& params, Site k, std::uint32_t runs, std::uint64_t budget,
                     std::uint64_t master_seed, unsigned workers) {
    std::vector<std::optional<bool>> outcomes(runs);
    parallel_for(runs, workers, [&](std::size_t i) {
        outcomes[i] = s_event_within_budget(params, k, budget, derive_seed(master_seed, i));
    });
    SEstimate est;
    est.k = k;
    est.budget = budget;
    std::uint64_t hits = 0;
    for (const auto& o : outcomes) {
        if (!o) ++est.unresolved;
        else if (*o) ++hits;
    }
    est.frequency = stats::proportion(hits, runs);
    return est;
}

// --- proof quantities -----------------------------------------------------

std::vector<ParticleRecord> particle_sequence(const ModelParams& params, std::span<const ParticleRecord> arrivals) {
    std::vector<ParticleRecord> seq;
    seq.reserve(params.initial_particles() + arrivals.size());
    std::uint64_t index = 0;
    for (const auto& [site, count] : params.initial_occupancy)
        for (int c = 0; c < count; ++c) seq.push_back({++index, Fate::Frozen, site, false, site});
    for (const auto& r : arrivals) {
        if (r.index != ++index) throw std::invalid_argument("particle_sequence: arrival indices are not contiguous");
        seq.push_back(r);
    }
    return seq;
}

std::array<int, 4> proof_thresholds(int n) {
    return {(n + 1) / 2, (3 * n + 3) / 4, (7 * n + 7) / 8, (15 * n + 15) / 16};
}

std::optional<std::uint32_t> ProofQuantities::g_at(std::uint64_t i) const {
    if (!i_half || i <= *i_half || i > last_index) return std::nullopt;
    return g_series[static_cast<std::size_t>(i - *i_half - 1)];
}

ProofQuantities compute_proof_quantities(std::span<const ParticleRecord> sequence, int n, Site k) {
    ProofQuantities q;
    q.k = k;
    q.n = n;
    q.thresholds = proof_thresholds(n);
    std::array<std::optional<std::uint64_t>*, 4> slots{&q.i_half, &q.i_3q, &q.i_7e, &q.i_15s};

    int count = 0;
    std::uint32_t g = 0;
    for (const auto& r : sequence) {
        q.last_index = r.index;
        if (q.i_half) {
            if (r.fate == Fate::Frozen && r.freeze_site == k + 1 && r.upon_arrival) ++g;
            q.g_series.push_back(g);
        }
        if (r.fate == Fate::Frozen && r.freeze_site == k) {
            ++count;
            for (std::size_t t = 0; t < slots.size(); ++t)
                if (!*slots[t] && count >= q.thresholds[t]) *slots[t] = r.index;
        }
    }
    return q;
}

std::uint64_t count_reaching(std::span<const ParticleRecord> sequence, Site k_prime, std::uint64_t J,
                             std::uint64_t J_prime) {
    return static_cast<std::uint64_t>(std::count_if(sequence.begin(), sequence.end(), [&](const ParticleRecord& r) {
        return r.index > J && r.index <= J_prime && r.min_site <= k_prime;
    }));
}

InequalityCheck check_proof_inequalities(std::span<const ParticleRecord> sequence, int n, Site k) {
    const int half = proof_thresholds(n)[0];
    InequalityCheck check;
    int f_k = 0, f_next = 0;
    std::optional<std::uint64_t> i_half;
    std::uint64_t reaching = 0;
    std::uint64_t g = 0;
    for (const auto& r : sequence) {
        const bool frozen = r.fate == Fate::Frozen;
        if (frozen && r.freeze_site == k) ++f_k;
        if (frozen && r.freeze_site == k + 1) ++f_next;
        if (i_half) {
            if (r.min_site <= k) ++reaching;
            if (frozen && r.freeze_site == k + 1 && r.upon_arrival) ++g;
            ++check.checked;
            if (static_cast<std::uint64_t>(f_k) > static_cast<std::uint64_t>(half) + reaching) ++check.upper_violations;
            if (static_cast<std::uint64_t>(f_next) < g) ++check.lower_violations;
        } else if (f_k >= half) {
            i_half = r.index;
        }
    }
    return check;
}

LemmaAccumulator::LemmaAccumulator(const ModelParams& params, Site k)
    : params_(params), k_(k), initial_count_(init_cluster(params).count(k)) {}

void LemmaAccumulator::add(std::span<const ParticleRecord> arrivals) {
    const int half = proof_thresholds(params_.n)[0];
    int f_k = initial_count_;
    for (const auto& r : arrivals) {
        if (f_k >= half && r.min_site <= k_ + 1) {
            ++qualifying_;
            exposure_ += static_cast<std::uint64_t>(f_k);
            if (r.fate == Fate::Frozen && r.freeze_site == k_ + 1 && r.upon_arrival) ++successes_;
        }
        if (r.fate == Fate::Frozen && r.freeze_site == k_) ++f_k;
    }
}

void LemmaAccumulator::merge(const LemmaAccumulator& other) {
    qualifying_ += other.qualifying_;
    successes_ += other.successes_;
    exposure_ += other.exposure_;
}

LemmaReport LemmaAccumulator::report(std::uint64_t min_samples) const {
    LemmaReport report;
    report.k = k_;
    report.n = params_.n;
    report.upon_arrival = stats::proportion(successes_, qualifying_);
    report.mean_exposure =
        qualifying_ ? static_cast<double>(exposure_) / (static_cast<double>(qualifying_) * params_.n) : 0.0;
    report.min_samples = min_samples;
    report.conclusive = qualifying_ > 0 && qualifying_ >= min_samples;
    report.passes = report.upon_arrival.estimate >= 0.5 - 4.0 * report.upon_arrival.standard_error;
    return report;
}

LemmaReport lemma_ingredient_check(const ModelParams& params,
                                   std::span<const std::vector<ParticleRecord>> arrival_logs, Site k,
                                   std::uint64_t min_samples) {
    LemmaAccumulator acc(params, k);
    for (const auto& log : arrival_logs) acc.add(log);
    return acc.report(min_samples);
}

// --- engine validation ----------------------------------------------------

ParticleSampler fast_sampler() {
    return [](std::uint64_t index, const ClusterState& cluster, const ModelParams& params, Rng& rng) {
        return run_particle_fast(index, cluster, params, rng);
    };
}

ParticleSampler naive_sampler(Site margin, std::uint64_t step_cap) {
    return [margin, step_cap](std::uint64_t index, const ClusterState& cluster, const ModelParams& params, Rng& rng) {
        return run_particle_naive(index, cluster, params, rng, step_cap, margin);
    };
}

EngineSample sample_engine(const ModelParams& params, std::uint32_t particles, std::uint64_t samples,
                           const ParticleSampler& sampler, std::uint64_t master_seed, unsigned workers) {
    struct Sequence {
        std::vector<std::string> joint, sites;
        bool truncated = false;
    };
    std::vector<Sequence> sequences(samples);
    const std::uint64_t initial = params.initial_particles();

    parallel_for(samples, workers, [&](std::size_t s) {
        Rng rng(derive_seed(master_seed, s));
        ClusterState cluster = init_cluster(params);
        Sequence& seq = sequences[s];
        for (std::uint32_t p = 0; p < particles; ++p) {
            const std::string prefix = "p" + std::to_string(p + 1) + ":";
            std::string what;
            if (cluster.blocked() && params.stop_on_blockage) {
                what = "halted";
            } else {
                const ParticleOutcome o = sampler(initial + p + 1, cluster, params, rng);
                if (o.truncated()) {
                    seq.truncated = true;
                    return;
                }
                if (o.escaped()) {
                    what = "escaped";
                } else {
                    what = "s" + std::to_string(o.freeze_site);
                    apply_freeze(cluster, o);
                }
                seq.joint.push_back(prefix + what + (o.frozen() ? (o.froze_upon_arrival ? ":a1" : ":a0") : ""));
                seq.sites.push_back(what);
                continue;
            }
            seq.joint.push_back(prefix + what);
            seq.sites.push_back(what);
        }
    });

    EngineSample out;
    out.samples = samples;
    for (const auto& seq : sequences) {
        if (seq.truncated) {
            ++out.truncated_samples;
            continue;
        }
        for (const auto& key : seq.joint) ++out.joint[key];
        for (const auto& key : seq.sites) ++out.freeze_sites[key];
    }
    return out;
}

EquivalenceReport compare_engines(std::string label, const ModelParams& params, std::uint32_t particles,
                                  std::uint64_t samples, const ParticleSampler& a, std::uint64_t seed_a,
                                  const ParticleSampler& b, std::uint64_t seed_b,
                                  const EquivalenceThresholds& thresholds, unsigned workers) {
    const EngineSample sa = sample_engine(params, particles, samples, a, seed_a, workers);
    const EngineSample sb = sample_engine(params, particles, samples, b, seed_b, workers);
    EquivalenceReport r;
    r.label = std::move(label);
    r.n = params.n;
    r.particles = particles;
    r.samples = samples;
    r.chi_square = stats::chi_square_homogeneity(sa.joint, sb.joint);
    r.tv_distance = stats::total_variation(sa.freeze_sites, sb.freeze_sites);
    r.truncation_rate = std::max(sa.truncation_rate(), sb.truncation_rate());
    r.voided = r.truncation_rate >= thresholds.max_truncation;
    r.passed = !r.voided && r.chi_square.p_value > thresholds.min_p_value && r.tv_distance < thresholds.max_tv;
    return r;
}

std::vector<EquivalenceReport> validate_engines(std::span<const ValidationConfig> configs, std::uint64_t samples,
                                                std::span<const Site> margins, std::uint64_t master_seed,
                                                std::uint64_t naive_step_cap,
                                                const EquivalenceThresholds& thresholds, unsigned workers) {
    std::vector<EquivalenceReport> reports;
    std::uint64_t stream = 0;
    for (const auto& cfg : configs) {
        const std::uint64_t fast_seed = derive_seed(master_seed, stream++);
        for (const Site m : margins) {
            const std::string label = "n=" + std::to_string(cfg.params.n) + " particles=" +
                                      std::to_string(cfg.particles) + " fast vs naive(M=" + std::to_string(m) + ")";
            reports.push_back(compare_engines(label, cfg.params, cfg.particles, samples, fast_sampler(), fast_seed,
                                              naive_sampler(m, naive_step_cap), derive_seed(master_seed, stream++),
                                              thresholds, workers));
        }
    }
    return reports;
}

// --- sweeps ---------------------------------------------------------------

std::uint64_t budget_for(const SweepConfig& config, int n) {
    if (config.fixed_budget) return *config.fixed_budget;
    return static_cast<std::uint64_t>(std::llround(std::ldexp(config.budget_base, n)));
}

ModelParams params_for(const SweepConfig& config, int n) {
    ModelParams p = config.informal_init ? informal_params(n) : formal_params(n);
    p.left_step_prob = config.left_step_prob;
    p.max_particles = budget_for(config, n);
    return p;
}

std::uint64_t sweep_run_index(int n, std::uint32_t i) {
    return (static_cast<std::uint64_t>(n) << 32) | i;
}

std::vector<RunResult> run_sweep(const SweepConfig& config) {
    struct Task {
        int n;
        std::uint32_t i;
    };
    std::vector<Task> tasks;
    for (const int n : config.ns)
        for (std::uint32_t i = 0; i < config.runs; ++i) tasks.push_back({n, i});
    std::vector<RunResult> results(tasks.size());
    parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
        const auto [n, i] = tasks[t];
        const std::uint64_t run_index = sweep_run_index(n, i);
        RunResult r = run_to_blockage(params_for(config, n), derive_seed(config.master_seed, run_index));
        r.run_index = run_index;
        results[t] = std::move(r);
    });
    return results;
}

SweepSummary summarize_sweep(const SweepConfig& config, std::span<const RunResult> runs) {
    SweepSummary summary;
    summary.s_site = config.s_site;
    for (const int n : config.ns) {
        SweepRow row;
        row.n = n;
        row.budget = budget_for(config, n);
        std::vector<double> blockages;
        std::uint64_t s_hits = 0;
        for (const auto& r : runs) {
            if (r.n != n) continue;
            ++row.runs;
            if (r.B) {
                blockages.push_back(static_cast<double>(*r.B));
                if (*r.B == config.s_site) ++s_hits;
            }
        }
        row.completed = static_cast<std::uint32_t>(blockages.size());
        if (!blockages.empty()) {
            row.median_B = stats::quantile(blockages, 0.5);
            row.q25_B = stats::quantile(blockages, 0.25);
            row.q75_B = stats::quantile(blockages, 0.75);
        }
        row.truncated_frac = row.runs ? static_cast<double>(row.runs - row.completed) / row.runs : 0.0;
        row.s_within_budget = stats::proportion(s_hits, row.runs);
        summary.rows.push_back(row);
    }

    for (const auto& row : summary.rows) {
        if (row.truncated_frac > 0.5) {
            summary.fit_status = "refused: truncated fraction above 0.5 at n=" + std::to_string(row.n);
            return summary;
        }
    }
    std::vector<double> xs, ys;
    for (const auto& row : summary.rows) {
        if (row.median_B && *row.median_B > 0) {
            xs.push_back(row.n);
            ys.push_back(std::log(*row.median_B));
        }
    }
    const bool distinct = !xs.empty() && std::any_of(xs.begin(), xs.end(), [&](double x) { return x != xs[0]; });
    if (xs.size() < 2 || !distinct) {
        summary.fit_status = "absent: fewer than two n values with positive median B";
        return summary;
    }
    summary.fit = stats::least_squares(xs, ys);
    summary.fit_status = "ok";
    return summary;
}

SweepSummary sweep(const SweepConfig& config) {
    const auto runs = run_sweep(config);
    return summarize_sweep(config, runs);
}

}  // namespace clogsim
