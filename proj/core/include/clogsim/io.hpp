// io.hpp - run records (JSON lines), sweep summaries (CSV) and the metadata
// block written next to every output file.
//
// Run record keys:
//   run_index, seed, n, B (integer or null), particles_used, truncated,
//   escaped_count, profile_summary {frontier, occupied_sites, max_count,
//   total_frozen}, and "profile" (f(0..R)) when requested.
//
// Sweep CSV columns, in order (UTF-8, LF line endings, empty cell = absent):
//   n, runs, median_B, q25_B, q75_B, truncated_frac, budget, completed,
//   S_site, S_within_budget, S_ci_low, S_ci_high, slope, slope_ci_low,
//   slope_ci_high
// The slope columns repeat the log(median B) ~ n fit on every row.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "clogsim/harness.hpp"

namespace clogsim {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kSweepCsvHeader =
    "n,runs,median_B,q25_B,q75_B,truncated_frac,budget,completed,S_site,S_within_budget,S_ci_low,S_ci_high,"
    "slope,slope_ci_low,slope_ci_high";

nlohmann::ordered_json run_record(const RunResult& run, bool include_profile = false);
void write_jsonl(std::ostream& out, std::span<const RunResult> runs, bool include_profile = false);

void write_sweep_csv(std::ostream& out, const SweepSummary& summary);

// {version, master_seed, seed_derivation, rng, config}.
nlohmann::ordered_json metadata(std::uint64_t master_seed, const nlohmann::ordered_json& config_echo);

nlohmann::ordered_json to_json(const EquivalenceReport& report);
nlohmann::ordered_json to_json(const LemmaReport& report);
nlohmann::ordered_json to_json(const stats::Proportion& p);

// Shortest decimal form that round-trips, used for every floating value.
std::string format_double(double value);

}  // namespace clogsim
