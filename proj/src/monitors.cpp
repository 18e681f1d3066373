#include "afdx/monitors.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace afdx {

std::string_view jitter_class_name(JitterClass cls) {
    switch (cls) {
        case JitterClass::TooEarly: return "too_early";
        case JitterClass::Ok: return "ok";
        case JitterClass::TooLate: return "too_late";
        case JitterClass::SkippedPeriod: return "skipped_period";
    }
    return "?";
}

JitterVerdict classify_jitter(std::int64_t period_index, Ns emit, Ns bag, Ns j_max,
                              std::int64_t speed_num, std::int64_t speed_den) {
    const Ns base = period_base(bag, period_index, speed_num, speed_den);
    const Ns jitter = emit - base;
    if (jitter < 0) return {JitterClass::TooEarly, jitter};
    if (jitter <= j_max) return {JitterClass::Ok, jitter};
    // jitter >= P, compared exactly: jitter * num >= bag * den
    const bool skipped = static_cast<__int128>(jitter) * speed_num >=
                         static_cast<__int128>(bag) * speed_den;
    return {skipped ? JitterClass::SkippedPeriod : JitterClass::TooLate, jitter};
}

LatencyVerdict check_latency(Ns emit, Ns recv, const TimedChannelSpec& path) {
    if (recv < emit) throw std::logic_error("latency monitor: reception before emission");
    const Ns latency = recv - emit;
    if (latency < path.bctt) return {LatencyClass::BelowBctt, latency};
    if (latency > path.wctt) return {LatencyClass::AboveWctt, latency};
    return {LatencyClass::InBounds, latency};
}

std::int64_t count_drops(std::span<const std::uint8_t> seqs) {
    std::int64_t lost = 0;
    for (std::size_t i = 1; i < seqs.size(); ++i) {
        // distance along the 1..255 cycle, minus one; 0 counts as the
        // position just before 1
        const std::int64_t a = seqs[i - 1];
        const std::int64_t b = seqs[i];
        lost += ((b - a - 1) % 255 + 255) % 255;
    }
    return lost;
}

namespace {

struct PathAccum {
    std::int64_t delivered = 0;
    std::int64_t discarded = 0;
    Ns lat_min = 0;
    Ns lat_max = 0;
    __int128 lat_sum = 0;
    std::int64_t below = 0;
    std::int64_t above = 0;
    std::vector<std::uint8_t> seqs;
    Ns last_arrival = 0;
    bool aliasing = false;  // inter-arrival beyond 254 BAGs: gaps wrap
};

struct VlAccum {
    std::int64_t emitted = 0;
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    std::int64_t filtered = 0;
    std::int64_t hist[4] = {0, 0, 0, 0};
    std::int64_t lost = 0;
    std::int64_t next_period = 0;
    bool anchored = false;  // period index aligned to the first row in window
};

}  // namespace

MonitorReport monitor_report(const TraceLog& trace, const TopologySpec& topo,
                             const ReportOptions& options) {
    MonitorReport report;
    if (trace.empty()) return report;

    Ns tmin = trace.front().time, tmax = trace.front().time;
    for (const TraceEvent& ev : trace) {
        tmin = std::min(tmin, ev.time);
        tmax = std::max(tmax, ev.time);
    }
    const Ns span = tmax - tmin;
    const Ns cut = static_cast<Ns>(static_cast<double>(span) * options.trim_pct / 100.0);
    report.window_begin = tmin + cut;
    report.window_end = tmax - cut;

    std::map<VlId, VlAccum> vls;
    std::map<std::pair<VlId, EsId>, PathAccum> paths;
    std::set<VlId> unknown;

    for (const TraceEvent& ev : trace) {
        if (ev.time < report.window_begin || ev.time > report.window_end) continue;
        const VirtualLinkSpec* vl = topo.find_vl(ev.vl_id);
        if (!vl) unknown.insert(ev.vl_id);
        VlAccum& acc = vls[ev.vl_id];
        switch (ev.event) {
            case TraceKind::Emitted: {
                ++acc.emitted;
                if (vl) {
                    if (!acc.anchored) {
                        // a trimmed window can open mid-stream: align the
                        // expected period to the slot this emission sits in
                        acc.next_period =
                            static_cast<std::int64_t>(static_cast<__int128>(ev.time) *
                                                      options.speed_num /
                                                      (static_cast<__int128>(vl->bag) *
                                                       options.speed_den));
                        acc.anchored = true;
                    }
                    const JitterVerdict verdict =
                        classify_jitter(acc.next_period, ev.time, vl->bag, vl->j_max,
                                        options.speed_num, options.speed_den);
                    ++acc.hist[static_cast<int>(verdict.cls)];
                    if (verdict.cls == JitterClass::SkippedPeriod) {
                        // the frame landed k whole periods late: those
                        // periods produced nothing
                        std::int64_t k = 1;
                        while (classify_jitter(acc.next_period + k, ev.time, vl->bag, vl->j_max,
                                               options.speed_num, options.speed_den)
                                   .cls == JitterClass::SkippedPeriod)
                            ++k;
                        acc.lost += k;
                        acc.next_period += k;
                    }
                }
                ++acc.next_period;
                break;
            }
            case TraceKind::Accepted: ++acc.accepted; break;
            case TraceKind::Rejected: ++acc.rejected; break;
            case TraceKind::Filtered: ++acc.filtered; break;
            case TraceKind::SkippedPeriod:
                ++acc.hist[static_cast<int>(JitterClass::SkippedPeriod)];
                ++acc.lost;
                ++acc.next_period;
                break;
            case TraceKind::Delivered: {
                if (!ev.dst || !ev.latency || *ev.latency < 0) {
                    report.issues.push_back("delivered row without usable dst/latency (vl " +
                                            std::to_string(ev.vl_id) + ")");
                    break;
                }
                PathAccum& path = paths[{ev.vl_id, *ev.dst}];
                if (path.delivered == 0) {
                    path.lat_min = *ev.latency;
                    path.lat_max = *ev.latency;
                } else if (vl && ev.time - path.last_arrival > 254 * vl->bag) {
                    path.aliasing = true;
                }
                path.last_arrival = ev.time;
                ++path.delivered;
                path.lat_min = std::min(path.lat_min, *ev.latency);
                path.lat_max = std::max(path.lat_max, *ev.latency);
                path.lat_sum += *ev.latency;
                path.seqs.push_back(ev.seq);
                const TimedChannelSpec* ch = topo.find_channel(ev.vl_id, *ev.dst);
                if (ch) {
                    const LatencyVerdict verdict =
                        check_latency(ev.time - *ev.latency, ev.time, *ch);
                    if (verdict.cls == LatencyClass::BelowBctt) ++path.below;
                    if (verdict.cls == LatencyClass::AboveWctt) {
                        ++path.above;
                        report.flagged.push_back({ev, "above_wctt"});
                    }
                }
                break;
            }
            case TraceKind::DiscardedDup:
                if (ev.dst) ++paths[{ev.vl_id, *ev.dst}].discarded;
                break;
        }
    }

    for (VlId id : unknown)
        report.issues.push_back("VL " + std::to_string(id) + " not present in the topology");

    for (const auto& [id, acc] : vls) {
        VlReport vr;
        vr.vl_id = id;
        vr.emitted = acc.emitted;
        vr.accepted = acc.accepted;
        vr.rejected = acc.rejected;
        vr.filtered = acc.filtered;
        std::copy(std::begin(acc.hist), std::end(acc.hist), std::begin(vr.jitter_hist));
        vr.lost_in_emission = acc.lost;
        report.vls.push_back(vr);
    }
    for (const auto& [key, acc] : paths) {
        PathReport pr;
        pr.vl_id = key.first;
        pr.dest = key.second;
        pr.delivered = acc.delivered;
        pr.discarded_dup = acc.discarded;
        pr.lat_min = acc.lat_min;
        pr.lat_max = acc.lat_max;
        pr.lat_mean =
            acc.delivered ? static_cast<double>(acc.lat_sum) / static_cast<double>(acc.delivered)
                          : 0.0;
        pr.below_bctt = acc.below;
        pr.above_wctt = acc.above;
        pr.seq_drops = count_drops(acc.seqs);
        if (const TimedChannelSpec* ch = topo.find_channel(key.first, key.second)) {
            pr.has_bounds = true;
            pr.bctt = ch->bctt;
            pr.wctt = ch->wctt;
        }
        const auto vl_it = vls.find(key.first);
        if (vl_it != vls.end())
            pr.residual = vl_it->second.emitted - acc.delivered - acc.discarded -
                          vl_it->second.rejected - vl_it->second.filtered;
        if (acc.aliasing)
            report.issues.push_back("VL " + std::to_string(key.first) + " -> ES " +
                                    std::to_string(key.second) +
                                    ": inter-arrival exceeded 254 BAGs, sequence gaps may "
                                    "alias (drop count is the minimal consistent loss)");
        report.paths.push_back(pr);
    }
    return report;
}

std::string report_to_json(const MonitorReport& report) {
    nlohmann::ordered_json doc;
    doc["window_begin_ns"] = report.window_begin;
    doc["window_end_ns"] = report.window_end;
    doc["vls"] = nlohmann::ordered_json::array();
    for (const VlReport& vr : report.vls) {
        nlohmann::ordered_json j;
        j["vl_id"] = vr.vl_id;
        j["emitted"] = vr.emitted;
        j["accepted"] = vr.accepted;
        j["rejected"] = vr.rejected;
        j["filtered"] = vr.filtered;
        j["jitter"] = {{"too_early", vr.jitter_hist[0]},
                       {"ok", vr.jitter_hist[1]},
                       {"too_late", vr.jitter_hist[2]},
                       {"skipped_period", vr.jitter_hist[3]}};
        j["lost_in_emission"] = vr.lost_in_emission;
        doc["vls"].push_back(j);
    }
    doc["paths"] = nlohmann::ordered_json::array();
    for (const PathReport& pr : report.paths) {
        nlohmann::ordered_json j;
        j["vl_id"] = pr.vl_id;
        j["dest"] = pr.dest;
        j["delivered"] = pr.delivered;
        j["discarded_dup"] = pr.discarded_dup;
        j["latency_min_ns"] = pr.lat_min;
        j["latency_max_ns"] = pr.lat_max;
        j["latency_mean_ns"] = pr.lat_mean;
        j["below_bctt"] = pr.below_bctt;
        j["above_wctt"] = pr.above_wctt;
        j["seq_drops"] = pr.seq_drops;
        if (pr.has_bounds) {
            j["bctt_ns"] = pr.bctt;
            j["wctt_ns"] = pr.wctt;
        }
        j["residual"] = pr.residual;
        doc["paths"].push_back(j);
    }
    doc["flagged"] = report.flagged.size();
    doc["issues"] = report.issues;
    return doc.dump(2);
}

std::string report_to_table(const MonitorReport& report, const TopologySpec& topo) {
    std::ostringstream out;
    char line[256];
    out << "per-VL emission summary\n";
    std::snprintf(line, sizeof line, "  %-5s %9s %9s %9s %9s %8s %8s %8s %8s %6s\n", "VL",
                  "emitted", "accepted", "rejected", "filtered", "early", "ok", "late", "skipped",
                  "lost");
    out << line;
    for (const VlReport& vr : report.vls) {
        std::snprintf(line, sizeof line,
                      "  %-5u %9lld %9lld %9lld %9lld %8lld %8lld %8lld %8lld %6lld\n", vr.vl_id,
                      static_cast<long long>(vr.emitted), static_cast<long long>(vr.accepted),
                      static_cast<long long>(vr.rejected), static_cast<long long>(vr.filtered),
                      static_cast<long long>(vr.jitter_hist[0]),
                      static_cast<long long>(vr.jitter_hist[1]),
                      static_cast<long long>(vr.jitter_hist[2]),
                      static_cast<long long>(vr.jitter_hist[3]),
                      static_cast<long long>(vr.lost_in_emission));
        out << line;
    }
    out << "per-path delivery summary (latency in us)\n";
    std::snprintf(line, sizeof line, "  %-5s %-12s %9s %9s %9s %9s %9s %7s %7s %6s %9s\n", "VL",
                  "dest", "delivered", "dup", "min", "mean", "max", "below", "above", "drops",
                  "residual");
    out << line;
    for (const PathReport& pr : report.paths) {
        std::snprintf(line, sizeof line,
                      "  %-5u %-12s %9lld %9lld %9s %9.1f %9s %7lld %7lld %6lld %9lld\n", pr.vl_id,
                      topo.es_label(pr.dest).c_str(), static_cast<long long>(pr.delivered),
                      static_cast<long long>(pr.discarded_dup),
                      format_ns_as_us(pr.lat_min).c_str(), pr.lat_mean / 1000.0,
                      format_ns_as_us(pr.lat_max).c_str(), static_cast<long long>(pr.below_bctt),
                      static_cast<long long>(pr.above_wctt), static_cast<long long>(pr.seq_drops),
                      static_cast<long long>(pr.residual));
        out << line;
    }
    if (!report.issues.empty()) {
        out << "issues\n";
        for (const std::string& issue : report.issues) out << "  " << issue << '\n';
    }
    return out.str();
}

void write_flagged_csv(std::ostream& out, std::span<const FlaggedFrame> flagged) {
    out << "time_ns,event,vl_id,src,dst,seq,latency_ns,reason\n";
    for (const FlaggedFrame& f : flagged) {
        const TraceEvent& ev = f.row;
        out << ev.time << ',' << trace_kind_name(ev.event) << ',' << ev.vl_id << ',' << ev.src
            << ',';
        if (ev.dst)
            out << *ev.dst;
        else
            out << '*';
        out << ',' << static_cast<unsigned>(ev.seq) << ',';
        if (ev.latency) out << *ev.latency;
        out << ',' << f.reason << '\n';
    }
}

}  // namespace afdx
