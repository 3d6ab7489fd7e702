// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <optional>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "clogsim/fast_engine.hpp"
#include "clogsim/harness.hpp"
#include "clogsim/io.hpp"
#include "clogsim/parallel.hpp"
#include "clogsim/rng.hpp"

namespace {

using namespace clogsim;

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& why) {
        if (!ok) {
            pass = false;
            detail << " [violated: " << why << "]";
        }
    }
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// True when `hits` of `trials` lies within 4 standard errors of `p`
// (exact agreement required when p is 0 or 1).
bool within_4se(std::uint64_t hits, std::uint64_t trials, double p) {
    const double freq = static_cast<double>(hits) / static_cast<double>(trials);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(trials));
    return std::abs(freq - p) <= 4 * se + 1e-12;
}

Verdict per_visit_law() {
    Verdict v;
    constexpr std::uint64_t kTrials = 100'000;
    int cases = 0;
    for (int n : {2, 4, 8}) {
        const std::set<int> cs{0, 1, (n + 1) / 2, n - 1, n};
        for (int c : cs) {
            const double p = static_cast<double>(c) / n;
            const std::uint64_t tag = static_cast<std::uint64_t>(n) * 100 + static_cast<std::uint64_t>(c);

            // Single transition at a site whose left neighbour holds c.
            ModelParams params;
            params.n = n;
            params.initial_occupancy = c > 0 ? std::map<Site, int>{{0, 1}, {1, c}} : std::map<Site, int>{{0, 1}};
            params.stop_on_blockage = false;
            const ClusterState cluster = init_cluster(params);
            Rng rng(derive_seed(1, tag));
            WalkerState w;
            w.position = 2;
            w.previous_position = 3;
            w.min_site = 2;
            std::uint64_t froze = 0;
            for (std::uint64_t t = 0; t < kTrials; ++t) froze += transition_step(w, cluster, params, rng).frozen;
            v.require(within_4se(froze, kTrials, p), "transition n=" + std::to_string(n) + " c=" + std::to_string(c));

            // First visit of an arriving particle to the entry site R + 1.
            if (c > 0) {
                ModelParams entry = params;
                entry.initial_occupancy = {{0, c}};
                const ClusterState prepared = init_cluster(entry);
                Rng rng2(derive_seed(2, tag));
                std::uint64_t first = 0;
                for (std::uint64_t t = 0; t < kTrials; ++t) {
                    const auto o = run_particle_fast(2, prepared, entry, rng2);
                    first += o.frozen() && o.visits == 1;
                }
                v.require(within_4se(first, kTrials, p), "entry n=" + std::to_string(n) + " c=" + std::to_string(c));
            }
            ++cases;
        }
    }
    v.detail << cases << " (c,n) cases x 1e5 trials";
    return v;
}

Verdict oracle_equivalence() {
    Verdict v;
    const std::vector<ValidationConfig> configs{{formal_params(3), 10}};
    const std::vector<Site> margins{2, 8, 32};
    const auto reports = validate_engines(configs, 10'000, margins, 20240601, 10'000'000, {}, workers());
    for (const auto& r : reports) {
        v.require(r.passed, r.label);
        v.detail << " {" << r.label << ": p=" << format_double(r.chi_square.p_value) << " tv=" << format_double(r.tv_distance)
                 << " trunc=" << format_double(r.truncation_rate) << "}";
    }
    v.require(reports.size() == margins.size(), "report count");
    return v;
}

struct SweepOutcome {
    Verdict growth;
    Verdict finiteness;
};

SweepOutcome exponential_growth_and_finiteness() {
    SweepOutcome out;
    SweepConfig cfg;
    cfg.ns = {2, 3, 4, 5, 6, 7, 8};
    cfg.runs = 200;
    cfg.master_seed = 7;
    cfg.budget_base = 1e4;
    cfg.workers = workers();
    const auto s = sweep(cfg);

    auto& g = out.growth;
    std::optional<double> prev;
    g.detail << "medians:";
    for (const auto& row : s.rows) {
        g.require(row.median_B.has_value(), "median missing n=" + std::to_string(row.n));
        if (!row.median_B) continue;
        g.detail << " " << *row.median_B;
        if (prev) g.require(*row.median_B > *prev, "median not increasing at n=" + std::to_string(row.n));
        prev = row.median_B;
    }
    g.require(s.fit.has_value() && s.fit->slope_ci_low.has_value(), "fit absent: " + s.fit_status);
    if (s.fit && s.fit->slope_ci_low) {
        g.require(s.fit->slope > 0 && *s.fit->slope_ci_low > 0, "slope CI does not exclude 0");
        g.detail << "; slope " << format_double(s.fit->slope) << " CI [" << format_double(*s.fit->slope_ci_low)
                 << ", " << format_double(*s.fit->slope_ci_high) << "]";
    }

    auto& f = out.finiteness;
    for (const auto& row : s.rows) {
        if (row.n > 4) continue;
        const double frac = static_cast<double>(row.completed) / row.runs;
        f.require(frac >= 0.99, "n=" + std::to_string(row.n));
        f.detail << " n=" << row.n << ":" << row.completed << "/" << row.runs;
    }
    return out;
}

// Everything the lemma, inequality and degenerate-case checks need from one
// logged run. Event logs for n = 8 are too large to keep for every run, so
// each run is audited as soon as it finishes.
struct RunAudit {
    std::optional<LemmaAccumulator> lemma;
    std::uint64_t checked = 0, upper = 0, lower = 0, thresholds_reached = 0;
    std::uint64_t particles = 0;
    std::vector<std::string> violations;
};

struct AuditBatch {
    int n = 0;
    ModelParams params;
    std::vector<RunAudit> runs;
};

constexpr Site kLemmaSite = 2;

RunAudit audit(const ModelParams& params, const RunResult& r) {
    RunAudit a;
    a.lemma.emplace(params, kLemmaSite);
    a.lemma->add(r.events);

    const auto seq = particle_sequence(params, r.events);
    for (Site k = 1; k <= 4; ++k) {
        const auto c = check_proof_inequalities(seq, params.n, k);
        a.checked += c.checked;
        a.upper += c.upper_violations;
        a.lower += c.lower_violations;
        a.thresholds_reached += c.checked > 0;
    }

    if (!r.events.empty() && r.events.front().freeze_site != 1) a.violations.push_back("particle 2 not at site 1");
    ClusterState cluster = init_cluster(params);
    for (const auto& e : r.events) {
        ++a.particles;
        if (e.fate != Fate::Frozen) continue;
        if (e.freeze_site < 1) a.violations.push_back("freeze below site 1");
        const Site before = cluster.frontier();
        apply_freeze_at(cluster, e.freeze_site);
        if (cluster.frontier() > before + 1) a.violations.push_back("frontier jumped");
    }
    if (!leftmost_blockage_holds(r, params.n)) a.violations.push_back("leftmost blockage invariant");
    return a;
}

// Appends runs first..first+count-1 of capacity n to the batch.
void extend(AuditBatch& batch, std::uint32_t count, std::uint64_t master) {
    const auto first = static_cast<std::uint32_t>(batch.runs.size());
    batch.runs.resize(first + count);
    parallel_for(count, workers(), [&](std::size_t i) {
        const auto idx = sweep_run_index(batch.n, first + static_cast<std::uint32_t>(i));
        batch.runs[first + i] =
            audit(batch.params, run_to_blockage(batch.params, derive_seed(master, idx), RunOptions{true}));
    });
}

AuditBatch audited_runs(int n, std::uint32_t count, std::uint64_t master) {
    AuditBatch out;
    out.n = n;
    out.params = formal_params(n);
    out.params.max_particles = static_cast<std::uint64_t>(std::ldexp(1e4, n));
    extend(out, count, master);
    return out;
}

std::uint64_t qualifying(const AuditBatch& batch) {
    LemmaAccumulator acc(batch.params, kLemmaSite);
    for (const auto& r : batch.runs) acc.merge(*r.lemma);
    return acc.report().upon_arrival.trials;
}

// Adds runs in chunks until the lemma sample reaches `target` particles.
AuditBatch lemma_batch(int n, std::uint32_t initial_runs, std::uint64_t target, std::uint32_t max_runs,
                       std::uint64_t master) {
    AuditBatch b = audited_runs(n, initial_runs, master);
    while (qualifying(b) < target && b.runs.size() < max_runs) extend(b, 1000, master);
    return b;
}

Verdict lemma_ingredient(const std::vector<AuditBatch>& batches) {
    Verdict v;
    for (const auto& b : batches) {
        LemmaAccumulator acc(b.params, kLemmaSite);
        for (const auto& r : b.runs) acc.merge(*r.lemma);
        const auto rep = acc.report(2000);
        v.require(rep.conclusive, "n=" + std::to_string(b.n) + " too few qualifying particles");
        v.require(rep.passes, "n=" + std::to_string(b.n) + " frequency below 1/2 - 4 SE");
        v.detail << " n=" << b.n << " (" << b.runs.size() << " runs): " << rep.upon_arrival.successes << "/"
                 << rep.upon_arrival.trials << " = " << format_double(rep.upon_arrival.estimate) << " (SE "
                 << format_double(rep.upon_arrival.standard_error) << ")";
    }
    return v;
}

Verdict run_inequalities(const std::vector<AuditBatch>& batches) {
    Verdict v;
    std::uint64_t checked = 0, upper = 0, lower = 0, reached = 0;
    for (const auto& b : batches) {
        for (const auto& r : b.runs) {
            checked += r.checked;
            upper += r.upper;
            lower += r.lower;
            reached += r.thresholds_reached;
        }
    }
    v.require(upper == 0, "upper bound violated");
    v.require(lower == 0, "lower bound violated");
    v.require(reached > 0, "no run reached the half threshold");
    v.detail << " k=1..4, (run,k) pairs with threshold: " << reached << ", indices checked: " << checked
             << ", violations: " << upper + lower;
    return v;
}

Verdict degenerate_cases(const std::vector<AuditBatch>& batches) {
    Verdict v;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto r = run_to_blockage(formal_params(1), derive_seed(3, s));
        v.require(r.B == Site{0} && r.particles_used == 1, "n=1 did not block at 0");
    }
    std::uint64_t runs = 0, particles = 0;
    std::set<std::string> seen;
    auto tally = [&](const AuditBatch& b) {
        for (const auto& r : b.runs) {
            ++runs;
            particles += r.particles;
            seen.insert(r.violations.begin(), r.violations.end());
        }
    };
    for (const auto& b : batches) tally(b);
    for (int n = 2; n <= 6; ++n) tally(audited_runs(n, 500, 99));
    for (const auto& what : seen) v.require(false, what);
    v.detail << " n=1 x 100 runs; " << runs << " runs, " << particles << " arrivals replayed";
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Verdict determinism() {
    Verdict v;
    const std::filesystem::path dir = std::filesystem::path(CLOGSIM_TEST_TMPDIR) / "acceptance_scratch";
    std::filesystem::create_directories(dir);
    auto outputs = [&](const std::string& workers) {
        std::vector<std::string> files;
        const auto jsonl = dir / ("simulate_w" + workers + ".jsonl");
        const auto csv = dir / ("sweep_w" + workers + ".csv");
        const auto runs = dir / ("sweep_runs_w" + workers + ".jsonl");
        std::ostringstream sink, err;
        const int a = cli::run({"simulate", "--n", "2:6", "--runs", "50", "--seed", "42", "--emit-profile",
                                "--workers", workers, "--out", jsonl.string()},
                               sink, err);
        const int b = cli::run({"sweep", "--n", "2:6", "--runs", "50", "--seed", "42", "--workers", workers, "--out",
                                csv.string(), "--runs-out", runs.string()},
                               sink, err);
        v.require(a == 0 && b == 0, "cli failed: " + err.str());
        return std::vector<std::string>{slurp(jsonl), slurp(csv), slurp(runs)};
    };
    const auto one = outputs("1");
    const auto eight = outputs("8");
    const char* names[] = {"simulate JSONL", "sweep CSV", "sweep runs JSONL"};
    for (std::size_t i = 0; i < one.size(); ++i) {
        v.require(!one[i].empty(), std::string(names[i]) + " empty");
        v.require(one[i] == eight[i], std::string(names[i]) + " differs");
        v.detail << " " << names[i] << ": " << one[i].size() << " bytes";
    }
    return v;
}

}  // namespace

int main() {
    bool all = true;
    auto report = [&](int id, const char* name, auto&& fn) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v = fn();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ":" << v.detail.str() << " ("
                  << format_double(std::round(secs * 10) / 10) << " s)" << std::endl;
        return v.pass;
    };

    report(1, "per-visit freeze law", per_visit_law);
    report(2, "fast engine matches naive oracle", oracle_equivalence);

    SweepOutcome sweep_outcome;
    bool swept = false;
    auto run_sweep_once = [&] {
        if (!swept) sweep_outcome = exponential_growth_and_finiteness();
        swept = true;
    };
    report(3, "median B grows exponentially in n", [&] {
        run_sweep_once();
        return std::move(sweep_outcome.growth);
    });

    std::vector<AuditBatch> batches;
    report(4, "upon-arrival freeze frequency at k+1 (k=2, f(k) >= ceil(n/2))", [&] {
        batches.push_back(lemma_batch(4, 2000, 2000, 20'000, 11));
        batches.push_back(lemma_batch(8, 5000, 2000, 20'000, 11));
        return lemma_ingredient(batches);
    });
    report(5, "per-run threshold inequalities", [&] { return run_inequalities(batches); });
    report(6, "degenerate and forced cases", [&] { return degenerate_cases(batches); });
    report(7, "outputs identical for 1 and 8 workers", determinism);
    report(8, "runs reach a blockage within budget (n=2,3,4)", [&] {
        run_sweep_once();
        return std::move(sweep_outcome.finiteness);
    });

    std::cout << (all ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << std::endl;
    return all ? 0 : 1;
}
