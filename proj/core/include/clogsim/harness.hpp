// harness.hpp - seeded Monte Carlo driver: runs to first blockage, S(k)
// estimates, per-run proof quantities, engine validation and n-sweeps.
//
// Reproducibility contract: a run is a pure function of (params, seed), and
// a run's seed is derive_seed(master_seed, run_index). Batch entry points
// take a worker count; results are placed by run index, so every output is
// identical for any number of workers.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clogsim/model.hpp"
#include "clogsim/stats.hpp"

namespace clogsim {

// One particle of a run, as needed to replay counts and proof quantities.
struct ParticleRecord {
    std::uint64_t index = 0;
    Fate fate = Fate::Frozen;
    Site freeze_site = 0;
    bool upon_arrival = false;
    Site min_site = 0;

    bool operator==(const ParticleRecord&) const = default;
};

struct RunOptions {
    bool record_events = false;  // keep one ParticleRecord per arrival
};

struct RunResult {
    std::uint64_t run_index = 0;
    std::uint64_t seed = 0;
    int n = 0;
    std::optional<Site> B;                 // leftmost blockage; absent when truncated
    std::uint64_t particles_used = 0;      // initial particles + arrivals
    std::uint64_t escaped_count = 0;
    std::vector<int> final_profile;        // f(0..R)
    bool truncated = false;                // particle budget ran out before any blockage
    std::vector<ParticleRecord> events;    // arrivals, when recorded

    bool operator==(const RunResult&) const = default;
};

// Runs arrivals until the first blockage or until params.max_particles
// arrivals. Checks on every particle that freeze sites are >= 1 and the
// frontier grows by at most one; a violation throws std::logic_error.
RunResult run_to_blockage(const ModelParams& params, std::uint64_t run_seed, const RunOptions& options = {});

// Post-hoc check: B present implies profile(B) = n and profile(k) < n for k < B.
bool leftmost_blockage_holds(const RunResult& result, int n);

// --- S(k) -----------------------------------------------------------------

// Whether f(k) reaches n within `budget` arrivals. The run continues past
// blockages elsewhere; it resolves to false as soon as some site right of k
// is blocked (nothing can reach k afterwards). nullopt: budget exhausted
// with the event still open.
std::optional<bool> s_event_within_budget(ModelParams params, Site k, std::uint64_t budget, std::uint64_t run_seed);

struct SEstimate {
    Site k = 0;
    std::uint64_t budget = 0;
    stats::Proportion frequency;   // unresolved runs count as "did not occur"
    std::uint64_t unresolved = 0;
};

SEstimate estimate_S(const ModelParams& params, Site k, std::uint32_t runs, std::uint64_t budget,
                     std::uint64_t master_seed, unsigned workers = 1);

// --- proof quantities -----------------------------------------------------

// Initial particles (indices 1..m in ascending site order, each with
// min_site = its site) followed by the recorded arrivals.
std::vector<ParticleRecord> particle_sequence(const ModelParams& params, std::span<const ParticleRecord> arrivals);

// ceil(n/2), ceil(3n/4), ceil(7n/8), ceil(15n/16).
std::array<int, 4> proof_thresholds(int n);

struct ProofQuantities {
    Site k = 0;
    int n = 0;
    std::array<int, 4> thresholds{};
    // First particle index at which f(k, .) reaches each threshold.
    std::optional<std::uint64_t> i_half, i_3q, i_7e, i_15s;
    std::uint64_t last_index = 0;
    // g(i) for i = i_half + 1 .. last_index: particles in (i_half, i] that
    // froze upon arrival at k + 1. Empty when i_half is absent.
    std::vector<std::uint32_t> g_series;

    std::optional<std::uint32_t> g_at(std::uint64_t i) const;
};

ProofQuantities compute_proof_quantities(std::span<const ParticleRecord> sequence, int n, Site k);

// C(k', J, J'): particles J < j <= J' whose trajectory reached k' or below.
std::uint64_t count_reaching(std::span<const ParticleRecord> sequence, Site k_prime, std::uint64_t J,
                             std::uint64_t J_prime);

struct InequalityCheck {
    std::uint64_t checked = 0;           // indices i > i_half examined
    std::uint64_t upper_violations = 0;  // f(k,i) > ceil(n/2) + C(k, i_half, i)
    std::uint64_t lower_violations = 0;  // f(k+1,i) < g(i)
};

InequalityCheck check_proof_inequalities(std::span<const ParticleRecord> sequence, int n, Site k);

struct LemmaReport {
    Site k = 0;
    int n = 0;
    stats::Proportion upon_arrival;     // among qualifying particles
    double mean_exposure = 0.0;         // average f(k)/n at qualifying arrivals
    std::uint64_t min_samples = 0;
    bool conclusive = false;
    bool passes = false;                // estimate >= 1/2 - 4 SE (only meaningful if conclusive)
};

// Particles arriving while f(k) >= ceil(n/2) whose path reached k + 1; the
// reported frequency is the share that froze upon arrival at k + 1.
// Accumulates one run's arrival log at a time so logs need not be kept.
class LemmaAccumulator {
public:
    LemmaAccumulator(const ModelParams& params, Site k);

    void add(std::span<const ParticleRecord> arrivals);
    void merge(const LemmaAccumulator& other);
    LemmaReport report(std::uint64_t min_samples = 2000) const;

private:
    ModelParams params_;
    Site k_;
    int initial_count_;
    std::uint64_t qualifying_ = 0;
    std::uint64_t successes_ = 0;
    std::uint64_t exposure_ = 0;   // sum of f(k) over qualifying arrivals
};

// `arrival_logs` holds RunResult::events of runs started from `params`.
LemmaReport lemma_ingredient_check(const ModelParams& params,
                                   std::span<const std::vector<ParticleRecord>> arrival_logs, Site k,
                                   std::uint64_t min_samples = 2000);

// --- engine validation ----------------------------------------------------

using ParticleSampler =
    std::function<ParticleOutcome(std::uint64_t index, const ClusterState&, const ModelParams&, Rng&)>;

ParticleSampler fast_sampler();
ParticleSampler naive_sampler(Site margin, std::uint64_t step_cap = 10'000'000);

struct EngineSample {
    stats::Histogram joint;          // (particle, freeze site, upon arrival)
    stats::Histogram freeze_sites;   // pooled over particles
    std::uint64_t samples = 0;
    std::uint64_t truncated_samples = 0;

    double truncation_rate() const {
        return samples == 0 ? 0.0 : static_cast<double>(truncated_samples) / static_cast<double>(samples);
    }
};

// `samples` independent sequences of the first `particles` arrivals. A
// sequence containing a truncated particle is excluded and counted.
EngineSample sample_engine(const ModelParams& params, std::uint32_t particles, std::uint64_t samples,
                           const ParticleSampler& sampler, std::uint64_t master_seed, unsigned workers = 1);

struct EquivalenceThresholds {
    double min_p_value = 1e-3;
    double max_tv = 0.02;
    double max_truncation = 0.01;
};

struct EquivalenceReport {
    std::string label;
    int n = 0;
    std::uint32_t particles = 0;
    std::uint64_t samples = 0;
    stats::ChiSquareResult chi_square;
    double tv_distance = 0.0;
    double truncation_rate = 0.0;   // worst of the two engines
    bool voided = false;
    bool passed = false;
};

EquivalenceReport compare_engines(std::string label, const ModelParams& params, std::uint32_t particles,
                                  std::uint64_t samples, const ParticleSampler& a, std::uint64_t seed_a,
                                  const ParticleSampler& b, std::uint64_t seed_b,
                                  const EquivalenceThresholds& thresholds = {}, unsigned workers = 1);

struct ValidationConfig {
    ModelParams params;
    std::uint32_t particles = 10;
};

// Fast engine against the naive oracle at each margin.
std::vector<EquivalenceReport> validate_engines(std::span<const ValidationConfig> configs, std::uint64_t samples,
                                                std::span<const Site> margins, std::uint64_t master_seed,
                                                std::uint64_t naive_step_cap = 10'000'000,
                                                const EquivalenceThresholds& thresholds = {},
                                                unsigned workers = 1);

// --- sweeps ---------------------------------------------------------------

struct SweepConfig {
    std::vector<int> ns;
    std::uint32_t runs = 200;
    std::uint64_t master_seed = 0;
    double budget_base = 1e4;                    // budget(n) = budget_base * 2^n
    std::optional<std::uint64_t> fixed_budget;   // overrides the schedule
    bool informal_init = false;
    double left_step_prob = 0.5;
    Site s_site = 1;
    unsigned workers = 1;
};

std::uint64_t budget_for(const SweepConfig& config, int n);
ModelParams params_for(const SweepConfig& config, int n);
// Run index of run i in the row for capacity n: (n << 32) | i.
std::uint64_t sweep_run_index(int n, std::uint32_t i);

struct SweepRow {
    int n = 0;
    std::uint32_t runs = 0;
    std::uint64_t budget = 0;
    std::uint32_t completed = 0;
    std::optional<double> median_B, q25_B, q75_B;   // over runs that blocked
    double truncated_frac = 0.0;
    stats::Proportion s_within_budget;              // runs with B == s_site
};

struct SweepSummary {
    Site s_site = 1;
    std::vector<SweepRow> rows;
    std::optional<stats::LinearFit> fit;   // log(median B) against n
    std::string fit_status;                // "ok" or why the fit is absent
};

std::vector<RunResult> run_sweep(const SweepConfig& config);
// Order-independent: any permutation of `runs` gives the same summary.
SweepSummary summarize_sweep(const SweepConfig& config, std::span<const RunResult> runs);
SweepSummary sweep(const SweepConfig& config);

}  // namespace clogsim
