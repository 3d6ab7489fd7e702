#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clogsim/harness.hpp"
#include "clogsim/io.hpp"
#include "clogsim/parallel.hpp"
#include "clogsim/rng.hpp"

namespace clogsim::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Options {
    std::string n = "4";
    std::uint64_t seed = 0;
    std::uint32_t runs = 1;
    std::string out;
    unsigned workers = 1;
    bool informal_init = false;
    double bias = 0.5;
    int verbose = 0;
    // simulate / sweep / lemma-stats
    std::optional<std::uint64_t> max_particles;
    double budget_base = 1e4;
    bool emit_profile = false;
    bool no_stop = false;
    Site s_site = 1;
    std::string runs_out;
    // validate
    std::uint32_t particles = 10;
    std::uint64_t samples = 10'000;
    std::vector<Site> margins{2, 8, 32};
    std::uint64_t step_cap = 10'000'000;
    // lemma-stats
    Site k = 1;
    std::uint64_t min_samples = 2000;
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

ordered_json echo(const std::string& subcommand, const Options& o) {
    ordered_json j;
    j["subcommand"] = subcommand;
    j["n"] = o.n;
    j["seed"] = o.seed;
    j["runs"] = o.runs;
    j["workers"] = o.workers;
    j["informal_init"] = o.informal_init;
    j["bias"] = o.bias;
    if (subcommand == "validate") {
        j["particles"] = o.particles;
        j["samples"] = o.samples;
        j["margins"] = o.margins;
        j["step_cap"] = o.step_cap;
        return j;
    }
    j["max_particles"] = o.max_particles ? ordered_json(*o.max_particles) : ordered_json(nullptr);
    j["budget_base"] = o.budget_base;
    if (subcommand == "simulate") {
        j["emit_profile"] = o.emit_profile;
        j["stop_on_blockage"] = !o.no_stop;
    }
    if (subcommand == "sweep") j["s_site"] = o.s_site;
    if (subcommand == "lemma-stats") {
        j["k"] = o.k;
        j["min_samples"] = o.min_samples;
    }
    return j;
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--n", o.n, "Capacity n per site: an integer or an inclusive range a:b")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master seed; run seeds are derived from (seed, run index)")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Output file (metadata goes to <out>.meta.json); stdout if omitted");
    cmd->add_option("--workers", o.workers, "Worker threads; results do not depend on this")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--informal-init", o.informal_init, "Start from particles at sites 0 and 1 instead of 0 only");
    cmd->add_option("--bias", o.bias, "Left-step probability given a move (directed walks); 0.5 is the plain walk")
        ->capture_default_str();
    cmd->add_flag("-v,--verbose", o.verbose, "Log one line per completed row to stderr");
}

void add_budget(CLI::App* cmd, Options& o) {
    cmd->add_option("--max-particles", o.max_particles,
                    "Arriving-particle budget per run (default: budget-base * 2^n)");
    cmd->add_option("--budget-base", o.budget_base, "Budget schedule constant A in A * 2^n")->capture_default_str();
}

ModelParams model_params(const Options& o, int n) {
    ModelParams p = o.informal_init ? informal_params(n) : formal_params(n);
    p.left_step_prob = o.bias;
    p.max_particles = o.max_particles ? *o.max_particles
                                      : static_cast<std::uint64_t>(std::llround(std::ldexp(o.budget_base, n)));
    p.stop_on_blockage = !o.no_stop;
    return p;
}

std::vector<int> capacities(const Options& o) {
    std::vector<int> ns;
    try {
        ns = parse_range(o.n);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--n: ") + e.what());
    }
    for (int n : ns)
        if (n < 1) throw ConfigError("--n: capacity must be >= 1");
    if (!(o.bias > 0.0 && o.bias <= 1.0)) throw ConfigError("--bias: must be in (0, 1]");
    if (!(o.budget_base > 0.0)) throw ConfigError("--budget-base: must be positive");
    return ns;
}

// Writes `body` to o.out (plus a metadata sidecar) or to `out`.
template <class Writer>
void emit(const Options& o, const std::string& subcommand, std::ostream& out, Writer&& body) {
    if (o.out.empty()) {
        body(out);
        return;
    }
    std::ofstream file(o.out, std::ios::binary);
    if (!file) throw ConfigError("--out: cannot open " + o.out);
    body(file);
    std::ofstream meta(o.out + ".meta.json", std::ios::binary);
    if (!meta) throw ConfigError("--out: cannot open " + o.out + ".meta.json");
    meta << metadata(o.seed, echo(subcommand, o)).dump(2) << '\n';
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto ns = capacities(o);
    std::vector<RunResult> runs;
    for (const int n : ns) {
        const ModelParams params = model_params(o, n);
        std::vector<RunResult> row(o.runs);
        parallel_for(o.runs, o.workers, [&](std::size_t i) {
            const auto idx = sweep_run_index(n, static_cast<std::uint32_t>(i));
            row[i] = run_to_blockage(params, derive_seed(o.seed, idx));
            row[i].run_index = idx;
        });
        if (o.verbose) {
            std::uint32_t blocked = 0;
            for (const auto& r : row) blocked += r.B.has_value();
            err << "n=" << n << " runs=" << o.runs << " blocked=" << blocked << '\n';
        }
        runs.insert(runs.end(), std::make_move_iterator(row.begin()), std::make_move_iterator(row.end()));
    }
    emit(o, "simulate", out, [&](std::ostream& s) { write_jsonl(s, runs, o.emit_profile); });
    return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    SweepConfig sc;
    sc.ns = capacities(o);
    sc.runs = o.runs;
    sc.master_seed = o.seed;
    sc.budget_base = o.budget_base;
    sc.fixed_budget = o.max_particles;
    sc.informal_init = o.informal_init;
    sc.left_step_prob = o.bias;
    sc.s_site = o.s_site;
    sc.workers = o.workers;

    std::vector<RunResult> runs;
    for (const int n : sc.ns) {
        SweepConfig row_cfg = sc;
        row_cfg.ns = {n};
        auto row = run_sweep(row_cfg);
        if (o.verbose) {
            const auto s = summarize_sweep(row_cfg, row);
            err << "n=" << n << " median_B=" << (s.rows[0].median_B ? format_double(*s.rows[0].median_B) : "NA")
                << " truncated_frac=" << format_double(s.rows[0].truncated_frac) << '\n';
        }
        runs.insert(runs.end(), std::make_move_iterator(row.begin()), std::make_move_iterator(row.end()));
    }
    const SweepSummary summary = summarize_sweep(sc, runs);
    if (o.verbose) err << "fit: " << summary.fit_status << '\n';
    emit(o, "sweep", out, [&](std::ostream& s) { write_sweep_csv(s, summary); });
    if (!o.runs_out.empty()) {
        std::ofstream f(o.runs_out, std::ios::binary);
        if (!f) throw ConfigError("--runs-out: cannot open " + o.runs_out);
        write_jsonl(f, runs);
    }
    return kOk;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto ns = capacities(o);
    if (o.particles < 1) throw ConfigError("--particles: must be >= 1");
    if (o.samples < 1) throw ConfigError("--samples: must be >= 1");
    for (const Site m : o.margins)
        if (m < 1) throw ConfigError("--margins: every margin must be >= 1");
    std::vector<ValidationConfig> configs;
    for (const int n : ns) {
        ModelParams p = model_params(o, n);
        configs.push_back({p, o.particles});
    }
    const auto reports = validate_engines(configs, o.samples, o.margins, o.seed, o.step_cap, {}, o.workers);
    bool voided = false, failed = false;
    ordered_json doc;
    doc["metadata"] = metadata(o.seed, echo("validate", o));
    doc["reports"] = ordered_json::array();
    for (const auto& r : reports) {
        voided |= r.voided;
        failed |= !r.passed;
        doc["reports"].push_back(to_json(r));
        if (o.verbose)
            err << r.label << " p=" << format_double(r.chi_square.p_value) << " tv=" << format_double(r.tv_distance)
                << (r.voided ? " VOID" : r.passed ? " PASS" : " FAIL") << '\n';
    }
    emit(o, "validate", out, [&](std::ostream& s) { s << doc.dump(2) << '\n'; });
    if (voided) return kVoidedTest;
    return failed ? kFailedTest : kOk;
}

int cmd_lemma(const Options& o, std::ostream& out, std::ostream& err) {
    const auto ns = capacities(o);
    ordered_json doc;
    doc["metadata"] = metadata(o.seed, echo("lemma-stats", o));
    doc["results"] = ordered_json::array();
    for (const int n : ns) {
        const ModelParams params = model_params(o, n);
        struct PerRun {
            std::optional<LemmaAccumulator> lemma;
            std::array<bool, 4> reached{};
            InequalityCheck inequalities;
        };
        std::vector<PerRun> per_run(o.runs);
        parallel_for(o.runs, o.workers, [&](std::size_t i) {
            const auto idx = sweep_run_index(n, static_cast<std::uint32_t>(i));
            const RunResult r = run_to_blockage(params, derive_seed(o.seed, idx), RunOptions{true});
            const auto seq = particle_sequence(params, r.events);
            const auto q = compute_proof_quantities(seq, n, o.k);
            PerRun& pr = per_run[i];
            pr.reached = {q.i_half.has_value(), q.i_3q.has_value(), q.i_7e.has_value(), q.i_15s.has_value()};
            pr.inequalities = check_proof_inequalities(seq, n, o.k);
            pr.lemma.emplace(params, o.k);
            pr.lemma->add(r.events);
        });
        LemmaAccumulator acc(params, o.k);
        std::uint64_t checked = 0, upper = 0, lower = 0;
        std::array<std::uint64_t, 4> reached{};
        for (const auto& pr : per_run) {
            acc.merge(*pr.lemma);
            for (std::size_t t = 0; t < 4; ++t) reached[t] += pr.reached[t];
            checked += pr.inequalities.checked;
            upper += pr.inequalities.upper_violations;
            lower += pr.inequalities.lower_violations;
        }
        const LemmaReport lemma = acc.report(o.min_samples);
        ordered_json res;
        res["n"] = n;
        res["runs"] = o.runs;
        res["lemma"] = to_json(lemma);
        res["thresholds"] = proof_thresholds(n);
        res["runs_reaching_threshold"] = reached;
        res["inequalities"] = {{"checked", checked}, {"upper_violations", upper}, {"lower_violations", lower}};
        doc["results"].push_back(res);
        if (o.verbose)
            err << "n=" << n << " k=" << o.k << " qualifying=" << lemma.upon_arrival.trials
                << " frequency=" << format_double(lemma.upon_arrival.estimate) << " runs_with_I_half=" << reached[0]
                << '\n';
    }
    emit(o, "lemma-stats", out, [&](std::ostream& s) { s << doc.dump(2) << '\n'; });
    return kOk;
}

}  // namespace

std::vector<int> parse_range(const std::string& text) {
    auto parse_int = [](std::string_view s) {
        int v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
        return v;
    };
    const auto colon = text.find(':');
    if (colon == std::string::npos) return {parse_int(text)};
    const int a = parse_int(std::string_view(text).substr(0, colon));
    const int b = parse_int(std::string_view(text).substr(colon + 1));
    if (b < a) throw std::invalid_argument("empty range '" + text + "'");
    std::vector<int> out;
    for (int v = a; v <= b; ++v) out.push_back(v);
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"clogsim: one-dimensional DLA clogging simulator"};
    app.require_subcommand(1);
    // One Options per subcommand: CLI11 writes defaults back into bound
    // variables of subcommands that were not selected.
    Options sim_o, sweep_o, val_o, lemma_o;

    auto* simulate = app.add_subcommand("simulate", "Run the process to first blockage; JSON lines per run");
    add_common(simulate, sim_o);
    add_budget(simulate, sim_o);
    simulate->add_option("--runs", sim_o.runs, "Runs per n")->capture_default_str();
    simulate->add_flag("--emit-profile", sim_o.emit_profile, "Include the full occupancy profile in each record");
    simulate->add_flag("--no-stop-on-blockage", sim_o.no_stop, "Keep adding particles until the budget is used");

    auto* sweep_cmd = app.add_subcommand("sweep", "Median/quartiles of B per n and the log(median B) ~ n fit; CSV");
    sweep_o.runs = 200;
    add_common(sweep_cmd, sweep_o);
    add_budget(sweep_cmd, sweep_o);
    sweep_cmd->add_option("--runs", sweep_o.runs, "Runs per n")->capture_default_str();
    sweep_cmd->add_option("--s-site", sweep_o.s_site, "Site k for the S(k)-within-budget columns")
        ->capture_default_str();
    sweep_cmd->add_option("--runs-out", sweep_o.runs_out, "Also write every run record as JSON lines");

    auto* validate = app.add_subcommand("validate", "Compare the fast engine with the naive oracle; JSON report");
    val_o.n = "3";
    add_common(validate, val_o);
    validate->add_option("--particles", val_o.particles, "Arrivals per sample sequence")->capture_default_str();
    validate->add_option("--samples", val_o.samples, "Sample sequences per engine")->capture_default_str();
    validate->add_option("--margins", val_o.margins, "Naive-oracle window margins")
        ->delimiter(',')
        ->capture_default_str();
    validate->add_option("--step-cap", val_o.step_cap, "Naive-oracle step cap per particle")->capture_default_str();

    auto* lemma = app.add_subcommand("lemma-stats", "Per-run proof quantities and the upon-arrival frequency; JSON");
    lemma_o.runs = 200;
    add_common(lemma, lemma_o);
    add_budget(lemma, lemma_o);
    lemma->add_option("--runs", lemma_o.runs, "Runs per n")->capture_default_str();
    lemma->add_option("--k", lemma_o.k, "Designated site k")->capture_default_str();
    lemma->add_option("--min-samples", lemma_o.min_samples, "Qualifying particles needed for a conclusive result")
        ->capture_default_str();

    std::vector<const char*> argv{"clogsim"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidConfig;
    }

    try {
        if (*simulate) return cmd_simulate(sim_o, out, err);
        if (*sweep_cmd) return cmd_sweep(sweep_o, out, err);
        if (*validate) return cmd_validate(val_o, out, err);
        if (*lemma) return cmd_lemma(lemma_o, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    }
    return kInvalidConfig;
}

}  // namespace clogsim::cli
