#include "afdx/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "afdx/analysis.hpp"
#include "afdx/engine.hpp"
#include "afdx/generators.hpp"
#include "afdx/monitors.hpp"
#include "afdx/policing.hpp"

namespace afdx::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

std::uint64_t resolve_seed(const std::string& flag) {
    std::string text = flag;
    if (text.empty()) {
        if (const char* env = std::getenv("AFDX_SIM_SEED")) text = env;
    }
    if (text.empty()) return kDefaultSeed;
    if (text == "random") {
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    return std::stoull(text);
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << content;
    return out.good();
}

bool parse_speed(const std::string& text, std::int64_t& num, std::int64_t& den) {
    const auto scaled = parse_decimal_ns(text, 1'000'000);  // value * 1e6
    if (!scaled || *scaled <= 0) return false;
    num = *scaled;
    den = 1'000'000;
    const std::int64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    return true;
}

bool parse_duration(const std::string& text, Ns& out) {
    if (text == "short") {
        out = 10 * kSec;
        return true;
    }
    if (text == "medium") {
        out = 60 * kSec;
        return true;
    }
    if (text == "long") {
        out = 300 * kSec;
        return true;
    }
    const auto ns = parse_decimal_ns(text, kSec);
    if (!ns || *ns <= 0) return false;
    out = *ns;
    return true;
}

// --- validate ---------------------------------------------------------

int cmd_validate(const std::string& topology_file) {
    const std::filesystem::path path(topology_file);
    const auto text = read_file(path);
    if (!text) {
        std::cerr << "error: cannot open " << topology_file << "\n";
        return kUsage;
    }
    std::vector<std::string> violations;
    if (path.extension() == ".json") {
        TopologySpec topo;
        try {
            topo = topology_from_json(*text);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kUsage;
        }
        violations = validate_topology(topo);
    } else {
        CsvTopology rows;
        try {
            rows = parse_csv(*text, /*strict=*/false);
        } catch (const CsvError& e) {
            std::cerr << "error: " << topology_file << ": " << e.what() << "\n";
            return kUsage;
        }
        const auto vls = vls_from_rows(rows);
        for (std::size_t i = 0; i < vls.size(); ++i)
            for (const std::string& v : validate_vl(vls[i]))
                violations.push_back("row " + std::to_string(i + 2) + " (VL " +
                                     std::to_string(vls[i].vl_id) + "): " + v);
    }
    for (const std::string& v : violations) std::cout << "violation: " << v << "\n";
    if (!violations.empty()) {
        std::cout << violations.size() << " violation(s)\n";
        return kViolation;
    }
    std::cout << "ok\n";
    return kOk;
}

// --- generate ---------------------------------------------------------

int cmd_generate(std::size_t random_n, const std::string& template_file, std::uint32_t copies,
                 const std::string& seed_flag, const std::string& out_file) {
    const std::uint64_t seed = resolve_seed(seed_flag);
    CsvTopology rows;
    try {
        if (!template_file.empty()) {
            const auto text = read_file(template_file);
            if (!text) {
                std::cerr << "error: cannot open " << template_file << "\n";
                return kUsage;
            }
            rows = replicate_rows(parse_csv(*text, /*strict=*/true), copies);
        } else {
            rows = generate_random_rows(RandomGenSpec{random_n, seed});
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    const std::filesystem::path path(out_file);
    const std::string content =
        path.extension() == ".json" ? topology_to_json(topology_from_rows(rows)) : emit_csv(rows);
    if (!write_file(path, content)) {
        std::cerr << "error: cannot write " << out_file << "\n";
        return kUsage;
    }
    std::cout << "seed: " << seed << "\n";
    std::cout << "wrote " << rows.rows.size() << " VLs to " << out_file << "\n";
    return kOk;
}

// --- simulate ---------------------------------------------------------

int cmd_simulate(const std::string& topology_file, const std::string& model_flag,
                 const std::string& duration_flag, const std::string& speed_flag,
                 const std::string& seed_flag, const std::string& pacing_flag,
                 const std::string& trace_file, const std::string& summary_json_file,
                 const std::string& flagged_file) {
    Scenario scenario;
    try {
        scenario.topology = load_topology_file(topology_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    const auto model = model_level_from(model_flag);
    if (!model) {
        std::cerr << "error: unknown model '" << model_flag << "' (tc|dvl|svl)\n";
        return kUsage;
    }
    scenario.model = *model;
    if (!parse_duration(duration_flag, scenario.duration)) {
        std::cerr << "error: bad duration '" << duration_flag << "'\n";
        return kUsage;
    }
    if (!parse_speed(speed_flag, scenario.speed_num, scenario.speed_den)) {
        std::cerr << "error: bad speed '" << speed_flag << "'\n";
        return kUsage;
    }
    if (pacing_flag == "fast") {
        scenario.pacing = Pacing::Fast;
    } else if (pacing_flag == "realtime") {
        scenario.pacing = Pacing::Realtime;
    } else {
        std::cerr << "error: bad pacing '" << pacing_flag << "' (fast|realtime)\n";
        return kUsage;
    }
    scenario.seed = resolve_seed(seed_flag);

    const auto violations = validate_topology(scenario.topology);
    if (!violations.empty()) {
        for (const std::string& v : violations) std::cerr << "violation: " << v << "\n";
        return kViolation;
    }

    RunResult result;
    try {
        if (scenario.pacing == Pacing::Realtime) {
            auto clock = make_steady_clock();
            result = run_paced(scenario, *clock);
        } else {
            result = run(scenario);
        }
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const EngineFault& e) {
        std::cerr << "fault: " << e.what() << "\n";
        return kViolation;
    }

    if (!trace_file.empty() && !write_file(trace_file, trace_to_csv(result.trace))) {
        std::cerr << "error: cannot write " << trace_file << "\n";
        return kUsage;
    }

    ReportOptions options;
    options.speed_num = scenario.speed_num;
    options.speed_den = scenario.speed_den;
    const MonitorReport report = monitor_report(result.trace, scenario.topology, options);

    std::cout << "seed: " << scenario.seed << "\n";
    char header[128];
    std::snprintf(header, sizeof header, "model: %s  duration: %.9g s  speed: %lld/%lld\n",
                  std::string(model_level_name(scenario.model)).c_str(),
                  static_cast<double>(scenario.duration) / 1e9,
                  static_cast<long long>(scenario.speed_num),
                  static_cast<long long>(scenario.speed_den));
    std::cout << header;
    std::cout << "trace rows: " << result.trace.size() << "\n";
    std::cout << report_to_table(report, scenario.topology);
    if (result.pacing) {
        const PacingReport& p = *result.pacing;
        char line[160];
        std::snprintf(line, sizeof line,
                      "pacing: events %zu, max drift %s us, mean drift %s us (%.4f%% of %s us)\n",
                      p.events, format_ns_as_us(p.max_drift).c_str(),
                      format_ns_as_us(p.mean_drift).c_str(), p.mean_drift_ratio() * 100.0,
                      format_ns_as_us(p.elapsed).c_str());
        std::cout << line;
        if (p.bound_exceeded)
            std::cout << "pacing: drift bound " << format_ns_as_us(p.drift_bound)
                      << " us exceeded (host scheduling noise)\n";
    }
    if (!summary_json_file.empty() && !write_file(summary_json_file, report_to_json(report))) {
        std::cerr << "error: cannot write " << summary_json_file << "\n";
        return kUsage;
    }
    if (!flagged_file.empty()) {
        std::ostringstream out;
        write_flagged_csv(out, report.flagged);
        if (!write_file(flagged_file, out.str())) {
            std::cerr << "error: cannot write " << flagged_file << "\n";
            return kUsage;
        }
    }
    return kOk;
}

// --- analyze ----------------------------------------------------------

int cmd_analyze(const std::string& trace_file, const std::string& topology_file, double trim,
                const std::string& cdf_prefix, const std::string& speed_flag,
                const std::string& flagged_file, const std::string& json_file) {
    const auto text = read_file(trace_file);
    if (!text) {
        std::cerr << "error: cannot open " << trace_file << "\n";
        return kUsage;
    }
    const TraceParseResult parsed = parse_trace_csv(*text);
    for (const TraceParseIssue& issue : parsed.issues)
        std::cerr << "trace line " << issue.line << ": " << issue.message << "\n";
    if (parsed.log.empty()) {
        std::cerr << "error: no usable trace rows in " << trace_file << "\n";
        return kViolation;
    }

    ReportOptions options;
    options.trim_pct = trim;
    if (!parse_speed(speed_flag, options.speed_num, options.speed_den)) {
        std::cerr << "error: bad speed '" << speed_flag << "'\n";
        return kUsage;
    }

    TopologySpec topo;
    bool have_topology = false;
    if (!topology_file.empty()) {
        try {
            topo = load_topology_file(topology_file);
            have_topology = true;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kUsage;
        }
    }

    const MonitorReport report = monitor_report(parsed.log, topo, options);
    if (have_topology) {
        std::cout << report_to_table(report, topo);
    } else {
        std::cout << "(no topology given: jitter classes and bounds checks unavailable)\n";
    }

    // per-path latency statistics over the trimmed window
    std::map<std::pair<VlId, EsId>, std::vector<Ns>> series;
    for (const TraceEvent& ev : parsed.log) {
        if (ev.time < report.window_begin || ev.time > report.window_end) continue;
        if (ev.event == TraceKind::Delivered && ev.dst && ev.latency && *ev.latency >= 0)
            series[{ev.vl_id, *ev.dst}].push_back(*ev.latency);
    }
    std::cout << "per-path latency statistics (us)\n";
    char line[192];
    std::snprintf(line, sizeof line, "  %-5s %-6s %9s %9s %9s %9s %9s %9s %9s\n", "VL", "dest",
                  "min", "mean", "p50", "p95", "p99", "max", "outliers");
    std::cout << line;
    for (const auto& [key, samples] : series) {
        const SeriesStats stats = series_stats(samples);
        std::snprintf(line, sizeof line, "  %-5u %-6u %9s %9.1f %9s %9s %9s %9s %9lld\n",
                      key.first, key.second, format_ns_as_us(stats.min).c_str(),
                      stats.mean / 1000.0, format_ns_as_us(stats.p50).c_str(),
                      format_ns_as_us(stats.p95).c_str(), format_ns_as_us(stats.p99).c_str(),
                      format_ns_as_us(stats.max).c_str(), static_cast<long long>(stats.outliers));
        std::cout << line;
    }

    if (!cdf_prefix.empty()) {
        for (const auto& [key, samples] : series) {
            const Ecdf ecdf = Ecdf::build(samples);
            std::ostringstream out;
            ecdf.write_csv(out);
            const std::string path = cdf_prefix + "vl" + std::to_string(key.first) + "_to_" +
                                     std::to_string(key.second) + ".csv";
            if (!write_file(path, out.str())) {
                std::cerr << "error: cannot write " << path << "\n";
                return kUsage;
            }
        }
        std::cout << "wrote " << series.size() << " CDF file(s) to " << cdf_prefix << "*\n";
    }
    if (!json_file.empty() && !write_file(json_file, report_to_json(report))) {
        std::cerr << "error: cannot write " << json_file << "\n";
        return kUsage;
    }
    if (!flagged_file.empty()) {
        std::ostringstream out;
        write_flagged_csv(out, report.flagged);
        if (!write_file(flagged_file, out.str())) {
            std::cerr << "error: cannot write " << flagged_file << "\n";
            return kUsage;
        }
    }
    return parsed.issues.empty() ? kOk : kViolation;
}

// --- policing-check ---------------------------------------------------

std::optional<std::vector<Ns>> parse_arrivals_ms(const std::string& flag) {
    std::string text = flag;
    if (std::filesystem::exists(flag)) {
        const auto content = read_file(flag);
        if (!content) return std::nullopt;
        text = *content;
    }
    std::vector<Ns> arrivals;
    std::string token;
    for (char c : text + ",") {
        if (c == ',' || c == '\n' || c == ' ') {
            if (!token.empty()) {
                const auto ns = parse_decimal_ns(token, kMs);
                if (!ns) return std::nullopt;
                arrivals.push_back(*ns);
                token.clear();
            }
        } else {
            token.push_back(c);
        }
    }
    return arrivals;
}

int cmd_policing_check(std::int64_t bag_ms, const std::string& jmax_us, const std::string& smax,
                       const std::string& arrivals_flag, std::size_t random_n,
                       const std::string& seed_flag) {
    const auto j_max = parse_decimal_ns(jmax_us, kUs);
    const auto s_max = ByteSize::parse(smax);
    if (bag_ms <= 0 || !j_max || !s_max) {
        std::cerr << "error: bad --bag/--jmax/--smax\n";
        return kUsage;
    }
    BucketParams params = [&]() -> BucketParams {
        return BucketParams::make(*s_max, bag_ms * kMs, *j_max);
    }();
    std::cout << "params: s_max " << s_max->str() << " B, bag " << bag_ms << " ms, j_max "
              << format_ns_as_us(*j_max) << " us\n";
    std::cout << "        delta1 " << format_ns_as_us(params.delta1()) << " us, delta2 "
              << format_ns_as_us(params.delta2()) << " us\n";
    std::cout << "config: " << params.config_json() << "\n";

    if (!arrivals_flag.empty()) {
        const auto arrivals = parse_arrivals_ms(arrivals_flag);
        if (!arrivals || arrivals->empty()) {
            std::cerr << "error: bad --arrivals (expected comma-separated ms values)\n";
            return kUsage;
        }
        for (std::size_t i = 1; i < arrivals->size(); ++i)
            if ((*arrivals)[i] <= (*arrivals)[i - 1]) {
                std::cerr << "error: arrivals must be strictly increasing\n";
                return kUsage;
            }
        const EquivalenceResult result = check_equivalence(params, *arrivals);
        std::cout << "decisions:";
        for (std::size_t i = 0; i < result.decisions.size(); ++i)
            std::cout << ' ' << (result.decisions[i] == Decision::Accept ? 'A' : 'R');
        std::cout << "\n";
        if (result.match()) {
            std::cout << "match: oracle and automaton agree on " << result.decisions.size()
                      << " arrival(s)\n";
            return kOk;
        }
        std::cout << "MISMATCH at index " << result.divergence->index << "\n";
        return kViolation;
    }

    const std::uint64_t seed = resolve_seed(seed_flag);
    std::cout << "seed: " << seed << "\n";
    rng::Stream stream(rng::derive(seed, 0xbead));
    for (std::size_t k = 0; k < random_n; ++k) {
        const auto arrivals = random_arrivals(stream, params);
        const EquivalenceResult result = check_equivalence(params, arrivals);
        if (!result.match()) {
            std::cout << "MISMATCH in sequence " << k << " at index " << result.divergence->index
                      << "\n";
            return kViolation;
        }
    }
    std::cout << "match: " << random_n << " random sequence(s), no divergence\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"AFDX network simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string topology_file, out_file, trace_file, template_file;
    std::string seed_flag, model_flag = "tc", duration_flag = "medium", speed_flag = "1";
    std::string pacing_flag = "fast", summary_json, flagged_file, cdf_prefix, json_file;
    std::string arrivals_flag, jmax_us, smax;
    std::size_t random_n = 0;
    std::uint32_t copies = 1;
    std::int64_t bag_ms = 0;
    double trim = 0.0;

    auto* validate = app.add_subcommand("validate", "check a topology file");
    validate->add_option("--topology", topology_file, "CSV or JSON topology")->required();

    auto* generate = app.add_subcommand("generate", "emit a benchmark topology");
    auto* opt_random = generate->add_option("--random", random_n, "number of random VLs");
    auto* opt_template = generate->add_option("--template", template_file, "CSV template file");
    generate->add_option("--copies", copies, "template copies (with --template)");
    generate->add_option("--seed", seed_flag, "generator seed (number or 'random')");
    generate->add_option("--out", out_file, "output file (.csv or .json)")->required();
    opt_random->excludes(opt_template);
    opt_template->excludes(opt_random);

    auto* simulate = app.add_subcommand("simulate", "run a scenario and write its trace");
    simulate->add_option("--topology", topology_file, "CSV or JSON topology")->required();
    simulate->add_option("--model", model_flag, "tc|dvl|svl (default tc)");
    simulate->add_option("--duration", duration_flag, "seconds or short|medium|long");
    simulate->add_option("--speed", speed_flag, "emission speed factor (default 1)");
    simulate->add_option("--seed", seed_flag, "run seed (number or 'random')");
    simulate->add_option("--pacing", pacing_flag, "fast|realtime");
    simulate->add_option("--trace", trace_file, "trace CSV output")->required();
    simulate->add_option("--summary-json", summary_json, "monitor summary JSON output");
    simulate->add_option("--flagged", flagged_file, "out-of-bounds frame buffer CSV");

    auto* analyze = app.add_subcommand("analyze", "monitors and statistics over a trace");
    analyze->add_option("--trace", trace_file, "trace CSV input")->required();
    analyze->add_option("--topology", topology_file, "topology for bounds and jitter classes");
    analyze->add_option("--trim", trim, "trim this percent of the span at each end")
        ->check(CLI::Range(0.0, 49.0));
    analyze->add_option("--cdf", cdf_prefix, "write one CDF CSV per path with this prefix");
    analyze->add_option("--speed", speed_flag, "speed factor the trace was recorded at");
    analyze->add_option("--flagged", flagged_file, "out-of-bounds frame buffer CSV");
    analyze->add_option("--json", json_file, "monitor summary JSON output");

    auto* policing = app.add_subcommand("policing-check", "token-bucket equivalence check");
    policing->add_option("--bag", bag_ms, "BAG in ms")->required();
    policing->add_option("--jmax", jmax_us, "max jitter in us")->required();
    policing->add_option("--smax", smax, "max frame size in bytes")->required();
    auto* opt_arrivals =
        policing->add_option("--arrivals", arrivals_flag, "comma-separated ms values or a file");
    auto* opt_rand_seq = policing->add_option("--random", random_n, "number of random sequences");
    policing->add_option("--seed", seed_flag, "sequence seed (number or 'random')");
    opt_arrivals->excludes(opt_rand_seq);
    opt_rand_seq->excludes(opt_arrivals);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(topology_file);
        if (generate->parsed()) {
            if (opt_random->count() == 0 && opt_template->count() == 0) {
                std::cerr << "error: generate needs exactly one of --random/--template\n";
                return kUsage;
            }
            if (opt_random->count() && random_n < 1) {
                std::cerr << "error: --random needs at least 1 VL\n";
                return kUsage;
            }
            return cmd_generate(random_n, template_file, copies, seed_flag, out_file);
        }
        if (simulate->parsed())
            return cmd_simulate(topology_file, model_flag, duration_flag, speed_flag, seed_flag,
                                pacing_flag, trace_file, summary_json, flagged_file);
        if (analyze->parsed())
            return cmd_analyze(trace_file, topology_file, trim, cdf_prefix, speed_flag,
                               flagged_file, json_file);
        if (policing->parsed()) {
            if (opt_arrivals->count() == 0 && opt_rand_seq->count() == 0) {
                std::cerr << "error: policing-check needs one of --arrivals/--random\n";
                return kUsage;
            }
            if (opt_rand_seq->count() && random_n < 1) {
                std::cerr << "error: --random needs at least 1 sequence\n";
                return kUsage;
            }
            return cmd_policing_check(bag_ms, jmax_us, smax, arrivals_flag, random_n, seed_flag);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace afdx::cli
