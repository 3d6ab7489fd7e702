#include "clogsim/io.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>

#include "clogsim/rng.hpp"

namespace clogsim {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

nlohmann::ordered_json run_record(const RunResult& run, bool include_profile) {
    nlohmann::ordered_json j;
    j["run_index"] = run.run_index;
    j["seed"] = run.seed;
    j["n"] = run.n;
    j["B"] = run.B ? nlohmann::ordered_json(*run.B) : nlohmann::ordered_json(nullptr);
    j["particles_used"] = run.particles_used;
    j["truncated"] = run.truncated;
    j["escaped_count"] = run.escaped_count;
    const auto& prof = run.final_profile;
    nlohmann::ordered_json summary;
    summary["frontier"] = static_cast<std::int64_t>(prof.size()) - 1;
    summary["occupied_sites"] = std::count_if(prof.begin(), prof.end(), [](int c) { return c > 0; });
    summary["max_count"] = prof.empty() ? 0 : *std::max_element(prof.begin(), prof.end());
    summary["total_frozen"] = std::accumulate(prof.begin(), prof.end(), std::int64_t{0});
    j["profile_summary"] = std::move(summary);
    if (include_profile) j["profile"] = prof;
    return j;
}

void write_jsonl(std::ostream& out, std::span<const RunResult> runs, bool include_profile) {
    for (const auto& r : runs) out << run_record(r, include_profile).dump() << '\n';
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepSummary& summary) {
    out << kSweepCsvHeader << '\n';
    std::optional<double> slope, lo, hi;
    if (summary.fit) {
        slope = summary.fit->slope;
        lo = summary.fit->slope_ci_low;
        hi = summary.fit->slope_ci_high;
    }
    for (const auto& row : summary.rows) {
        out << row.n << ',' << row.runs << ',' << cell(row.median_B) << ',' << cell(row.q25_B) << ','
            << cell(row.q75_B) << ',' << format_double(row.truncated_frac) << ',' << row.budget << ','
            << row.completed << ',' << summary.s_site << ',' << format_double(row.s_within_budget.estimate) << ','
            << format_double(row.s_within_budget.ci_low) << ',' << format_double(row.s_within_budget.ci_high) << ','
            << cell(slope) << ',' << cell(lo) << ',' << cell(hi) << '\n';
    }
}

nlohmann::ordered_json metadata(std::uint64_t master_seed, const nlohmann::ordered_json& config_echo) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["master_seed"] = master_seed;
    j["seed_derivation"] = kSeedDerivationId;
    j["rng"] = kRngEngineId;
    j["config"] = config_echo;
    return j;
}

nlohmann::ordered_json to_json(const stats::Proportion& p) {
    nlohmann::ordered_json j;
    j["successes"] = p.successes;
    j["trials"] = p.trials;
    j["estimate"] = p.estimate;
    j["standard_error"] = p.standard_error;
    j["ci_low"] = p.ci_low;
    j["ci_high"] = p.ci_high;
    return j;
}

nlohmann::ordered_json to_json(const EquivalenceReport& r) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["n"] = r.n;
    j["particles"] = r.particles;
    j["samples"] = r.samples;
    j["chi_square"] = r.chi_square.statistic;
    j["degrees_of_freedom"] = r.chi_square.degrees_of_freedom;
    j["p_value"] = r.chi_square.p_value;
    j["tv_distance"] = r.tv_distance;
    j["truncation_rate"] = r.truncation_rate;
    j["voided"] = r.voided;
    j["passed"] = r.passed;
    return j;
}

nlohmann::ordered_json to_json(const LemmaReport& r) {
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["n"] = r.n;
    j["upon_arrival"] = to_json(r.upon_arrival);
    j["mean_exposure"] = r.mean_exposure;
    j["bound"] = 0.5;
    j["min_samples"] = r.min_samples;
    j["conclusive"] = r.conclusive;
    j["passes"] = r.passes;
    return j;
}

}  // namespace clogsim
