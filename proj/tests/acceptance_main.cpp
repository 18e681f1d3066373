// Acceptance suite: every criterion prints one PASS/FAIL line with its
// runtime; the process exits nonzero if any hard criterion fails. The
// paced-mode criterion is advisory (host scheduling noise) and reports
// ADVISORY instead of failing the suite.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "afdx/analysis.hpp"
#include "afdx/cli.hpp"
#include "afdx/engine.hpp"
#include "afdx/generators.hpp"
#include "afdx/monitors.hpp"
#include "afdx/policing.hpp"

using namespace afdx;

namespace {

struct Outcome {
    bool pass = false;
    bool advisory = false;  // reported, never fails the suite
    std::string detail;
};

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string fms_json_path() { return std::string(AFDX_DATA_DIR) + "/fms.json"; }

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string read_whole(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// --- criteria ----------------------------------------------------------

Outcome c1_jitter_formula() {
    VirtualLinkSpec vl1;
    vl1.vl_id = 1;
    vl1.source = 1;
    vl1.destinations = {3, 4};
    vl1.bag = 32 * kMs;
    vl1.s_max = ByteSize::from_bytes(75);
    vl1.j_max = 1;
    const std::vector<VirtualLinkSpec> vls = {vl1};
    const Ratio bound = max_jitter_for_es_ns(vls);
    if (!(bound == Ratio::from_int(47'600)))
        return {false, false, "expected 47.6 us, got " + format_ns_as_us(bound) + " us"};
    if (format_ns_as_us(bound) != "47.6")
        return {false, false, "rendering regressed: " + format_ns_as_us(bound)};
    return {true, false, "j_max(VL1) = 47.6 us exactly"};
}

Outcome c2_policer_config() {
    const BucketParams params = BucketParams::make(ByteSize::from_bytes(75), 32 * kMs, 500 * kUs);
    if (params.rate_bytes_per_s_ceil() != 2344)
        return {false, false, "rate " + std::to_string(params.rate_bytes_per_s_ceil())};
    if (params.burst_bytes_ceil() != 77)
        return {false, false, "burst " + std::to_string(params.burst_bytes_ceil())};
    return {true, false, "rate 2344 B/s, burst 77 B"};
}

Outcome c3_deltas() {
    const BucketParams params = BucketParams::make(ByteSize::from_bytes(100), 8 * kMs, 2 * kMs);
    if (params.delta1() != 6 * kMs || params.delta2() != 2 * kMs)
        return {false, false,
                "delta1 " + std::to_string(params.delta1()) + " ns, delta2 " +
                    std::to_string(params.delta2()) + " ns"};
    return {true, false, "delta1 = 6, delta2 = 2 (time units of bag 8)"};
}

Outcome c4_equivalence() {
    rng::Stream stream(0x5eed);
    const std::size_t cases = 100'000;
    for (std::size_t i = 0; i < cases; ++i) {
        const BucketParams params = random_params(stream);
        const std::vector<Ns> arrivals = random_arrivals(stream, params);
        const EquivalenceResult result = check_equivalence(params, arrivals);
        if (!result.match())
            return {false, false,
                    "divergence in case " + std::to_string(i) + " at index " +
                        std::to_string(result.divergence->index)};
    }
    return {true, false, std::to_string(cases) + " random sequences, 0 mismatches"};
}

Outcome c5_fms_end_to_end() {
    Scenario sc;
    sc.topology = load_topology_file(fms_json_path());
    sc.model = ModelLevel::TimedChannel;
    sc.duration = 60 * kSec;
    sc.seed = 1;
    const RunResult result = run(sc);

    std::map<std::pair<VlId, EsId>, std::int64_t> delivered;
    std::map<std::pair<VlId, EsId>, std::vector<std::uint8_t>> seqs;
    std::int64_t dropped = 0;
    for (const TraceEvent& ev : result.trace) {
        switch (ev.event) {
            case TraceKind::Delivered: {
                const TimedChannelSpec* ch = sc.topology.find_channel(ev.vl_id, *ev.dst);
                if (!ch) return {false, false, "delivery without a channel"};
                if (*ev.latency < ch->bctt || *ev.latency > ch->wctt)
                    return {false, false,
                            "latency " + std::to_string(*ev.latency) + " ns outside " +
                                (ch->name.empty() ? "bounds" : ch->name)};
                ++delivered[{ev.vl_id, *ev.dst}];
                seqs[{ev.vl_id, *ev.dst}].push_back(ev.seq);
                break;
            }
            case TraceKind::Rejected:
            case TraceKind::Filtered:
            case TraceKind::DiscardedDup: ++dropped; break;
            default: break;
        }
    }
    const std::int64_t vl3 = delivered[{3, 1}];
    if (vl3 < 7499 || vl3 > 7501)
        return {false, false, "VL3 deliveries " + std::to_string(vl3) + ", expected 7500 +- 1"};
    if (dropped != 0) return {false, false, std::to_string(dropped) + " frames dropped"};
    for (const auto& [path, list] : seqs)
        if (count_drops(list) != 0)
            return {false, false, "sequence gap on VL " + std::to_string(path.first)};
    return {true, false,
            "all latencies in table bounds, VL3 = " + std::to_string(vl3) + ", zero drops"};
}

Outcome c6_jitter_monitor() {
    const Ns bag = 32 * kMs;
    const Ns j_max = 47'600;
    const Ns eps = 1;
    const std::int64_t i = 5;
    const Ns base = i * bag;
    struct Probe {
        Ns emit;
        JitterClass expected;
    };
    const Probe probes[] = {
        {base - eps, JitterClass::TooEarly},
        {base + j_max / 2, JitterClass::Ok},
        {base + j_max + eps, JitterClass::TooLate},
        {base + bag + eps, JitterClass::SkippedPeriod},
    };
    for (const Probe& probe : probes)
        if (classify_jitter(i, probe.emit, bag, j_max).cls != probe.expected)
            return {false, false, "probe at " + std::to_string(probe.emit) + " misclassified"};

    rng::Stream stream(6);
    for (int round = 0; round < 10'000; ++round) {
        const auto idx = static_cast<std::int64_t>(stream.u64_below(100));
        const Ns emit = stream.uniform_ns(0, 200 * bag);
        const JitterVerdict v = classify_jitter(idx, emit, bag, j_max);
        const Ns jitter = emit - idx * bag;
        const bool early = jitter < 0;
        const bool ok = jitter >= 0 && jitter <= j_max;
        const bool late = jitter > j_max && jitter < bag;
        const bool skipped = jitter >= bag;
        const JitterClass expected = early ? JitterClass::TooEarly
                                    : ok   ? JitterClass::Ok
                                    : late ? JitterClass::TooLate
                                           : JitterClass::SkippedPeriod;
        if (v.cls != expected || (early + ok + late + skipped) != 1)
            return {false, false, "partition broken at emit " + std::to_string(emit)};
    }
    return {true, false, "boundary probes and 10^4 random points partition cleanly"};
}

Outcome c7_drop_detection() {
    VirtualLinkSpec vl1;
    vl1.vl_id = 1;
    vl1.source = 1;
    vl1.destinations = {3};
    vl1.bag = 32 * kMs;
    vl1.s_max = ByteSize::from_bytes(75);
    vl1.j_max = 500 * kUs;
    const BucketParams params = BucketParams::for_vl(vl1);

    AutomatonPolicer policer(params);
    OraclePolicer oracle(params);
    int rejections = 0;
    std::vector<std::uint8_t> received;
    std::uint8_t seq = 0;
    // frame 1 on schedule, frame 2 inside delta1, frame 3 a BAG later
    const Ns times[] = {0, params.delta1() - 1, params.delta1() - 1 + vl1.bag};
    for (const Ns t : times) {
        seq = next_seq(seq);
        const Decision d = policer.on_frame(t);
        if (d != oracle.on_frame(t)) return {false, false, "policers disagree on the burst"};
        if (d == Decision::Reject)
            ++rejections;
        else
            received.push_back(seq);
    }
    if (rejections != 1) return {false, false, std::to_string(rejections) + " rejections"};
    if (count_drops(received) != 1)
        return {false, false, "receiver counted " + std::to_string(count_drops(received))};
    const std::vector<std::uint8_t> wrap = {254, 255, 1};
    if (count_drops(wrap) != 0) return {false, false, "wrap case miscounted"};
    return {true, false, "burst: 1 rejection, 1 counted drop; wrap case counts 0"};
}

Outcome c8_determinism() {
    const auto dir = std::filesystem::path(AFDX_TEST_TMP) / "acceptance";
    std::filesystem::create_directories(dir);
    const std::string trace_a = (dir / "det_a.csv").string();
    const std::string trace_b = (dir / "det_b.csv").string();
    auto simulate = [&](const std::string& out) {
        const std::vector<std::string> args = {
            "simulate", "--topology", fms_json_path(), "--model", "svl", "--duration", "10",
            "--seed",   "77",         "--trace",       out};
        std::ostringstream sink;
        auto* old = std::cout.rdbuf(sink.rdbuf());
        const int code = cli::run(args);
        std::cout.rdbuf(old);
        return code;
    };
    if (simulate(trace_a) != 0 || simulate(trace_b) != 0)
        return {false, false, "simulate invocation failed"};
    const std::string a = read_whole(trace_a);
    const std::string b = read_whole(trace_b);
    if (a.empty() || a != b) return {false, false, "traces differ"};
    char buf[64];
    std::snprintf(buf, sizeof buf, "fnv64 %016llx on both runs",
                  static_cast<unsigned long long>(fnv1a(a)));
    return {true, false, buf};
}

Outcome c9_ecdf_properties() {
    rng::Stream stream(9);
    for (int round = 0; round < 1'000; ++round) {
        const std::size_t n = 1 + stream.u64_below(300);
        std::vector<Ns> samples;
        for (std::size_t i = 0; i < n; ++i) samples.push_back(stream.uniform_ns(0, 1'000'000));
        const Ecdf e = Ecdf::build(samples);
        if (e.fraction_at(e.max()) != 1.0) return {false, false, "F(max) != 1"};
        double prev = 0.0;
        for (std::size_t i = 0; i < e.values().size(); ++i) {
            const double f = e.fraction_at(e.values()[i]);
            if (f < prev) return {false, false, "F not monotone"};
            prev = f;
        }
        Ns last = e.min();
        for (const double p : {1.0, 10.0, 50.0, 90.0, 99.0, 100.0}) {
            const Ns v = e.percentile(p);
            if (v < last) return {false, false, "percentile not monotone in p"};
            last = v;
        }
        if (e.percentile(100) != e.max()) return {false, false, "p100 != max"};
        const Ns c = 1 + static_cast<Ns>(stream.u64_below(500));
        std::vector<Ns> scaled;
        for (const Ns v : samples) scaled.push_back(v * c);
        const Ecdf es = Ecdf::build(scaled);
        for (const double p : {5.0, 50.0, 95.0})
            if (es.percentile(p) != e.percentile(p) * c)
                return {false, false, "scale equivariance broken"};
    }
    return {true, false, "10^3 random sample sets satisfy all ECDF properties"};
}

Outcome c10_paced_mode() {
    Scenario sc;
    sc.topology = load_topology_file(fms_json_path());
    sc.model = ModelLevel::TimedChannel;
    sc.duration = 10 * kSec;
    sc.seed = 4;
    sc.pacing = Pacing::Realtime;
    const auto clock = make_steady_clock();
    const RunResult result = run_paced(sc, *clock);
    if (!result.pacing) return {false, true, "no pacing report"};
    const double ratio = result.pacing->mean_drift_ratio();
    char buf[160];
    std::snprintf(buf, sizeof buf, "mean drift %s us over %s us wall (%.4f%%; target < 1%%)",
                  format_ns_as_us(result.pacing->mean_drift).c_str(),
                  format_ns_as_us(result.pacing->elapsed).c_str(), ratio * 100.0);
    return {ratio < 0.01, true, buf};
}

struct Criterion {
    const char* id;
    const char* title;
    double budget_ms;
    std::function<Outcome()> check;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"C1", "per-ES jitter bound reproduction", 1.0, c1_jitter_formula},
        {"C2", "policer rate/burst export", 1.0, c2_policer_config},
        {"C3", "delta constants", 1.0, c3_deltas},
        {"C4", "oracle/automaton equivalence", 60'000.0, c4_equivalence},
        {"C5", "FMS 60 s timed-channel run", 30'000.0, c5_fms_end_to_end},
        {"C6", "jitter monitor boundaries", 5'000.0, c6_jitter_monitor},
        {"C7", "policing drop detection", 5'000.0, c7_drop_detection},
        {"C8", "trace determinism", 60'000.0, c8_determinism},
        {"C9", "ECDF properties", 10'000.0, c9_ecdf_properties},
        {"C10", "paced mode drift (advisory)", 60'000.0, c10_paced_mode},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.check();
        } catch (const std::exception& e) {
            outcome = {false, false, std::string("exception: ") + e.what()};
        }
        const double elapsed = ms_since(start);
        const bool in_budget = elapsed <= criterion.budget_ms;
        const bool pass = outcome.pass && in_budget;
        const char* verdict = pass ? "PASS" : outcome.advisory ? "ADVISORY-EXCEEDED" : "FAIL";
        if (!pass && !outcome.advisory) ++failures;
        std::printf("%-4s %-42s %-17s %9.2f ms  %s%s\n", criterion.id, criterion.title, verdict,
                    elapsed, outcome.detail.c_str(),
                    in_budget ? "" : " [over runtime budget]");
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures ? 1 : 0;
}
