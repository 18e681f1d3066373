#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "afdx/models.hpp"
#include "afdx/trace.hpp"

namespace afdx {

/// Emission-jitter categories. For period i with effective period
/// P = bag/speed: jitter = emit - i*P; TooEarly when negative, Ok in
/// [0, j_max], TooLate in (j_max, P), SkippedPeriod at or past P.
enum class JitterClass : std::uint8_t { TooEarly, Ok, TooLate, SkippedPeriod };

std::string_view jitter_class_name(JitterClass cls);

struct JitterVerdict {
    JitterClass cls = JitterClass::Ok;
    Ns jitter = 0;
};

JitterVerdict classify_jitter(std::int64_t period_index, Ns emit, Ns bag, Ns j_max,
                              std::int64_t speed_num = 1, std::int64_t speed_den = 1);

enum class LatencyClass : std::uint8_t { BelowBctt, InBounds, AboveWctt };

struct LatencyVerdict {
    LatencyClass cls = LatencyClass::InBounds;
    Ns latency = 0;
};

/// Compares recv - emit against the path's closed [bctt, wctt].
/// recv < emit is a clock-consistency fault and throws.
LatencyVerdict check_latency(Ns emit, Ns recv, const TimedChannelSpec& path);

/// Frames lost according to sequence-number discontinuities, summed
/// over consecutive pairs with wrap-aware distance in the 1..255
/// cycle. A leading 0 acts as the reset marker.
std::int64_t count_drops(std::span<const std::uint8_t> seqs);

struct ReportOptions {
    double trim_pct = 0.0;  // drop this percent of the time span at each end
    std::int64_t speed_num = 1;
    std::int64_t speed_den = 1;
};

struct PathReport {
    VlId vl_id = 0;
    EsId dest = 0;
    std::int64_t delivered = 0;
    std::int64_t discarded_dup = 0;
    Ns lat_min = 0;
    Ns lat_max = 0;
    double lat_mean = 0.0;
    std::int64_t below_bctt = 0;
    std::int64_t above_wctt = 0;
    std::int64_t seq_drops = 0;  // from receiver-side discontinuities
    bool has_bounds = false;
    Ns bctt = 0;
    Ns wctt = 0;
    /// emitted - delivered - discarded - rejected - filtered; nonzero
    /// means frames were still in flight (or the trace is truncated).
    std::int64_t residual = 0;
};

struct VlReport {
    VlId vl_id = 0;
    std::int64_t emitted = 0;
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    std::int64_t filtered = 0;
    std::int64_t jitter_hist[4] = {0, 0, 0, 0};
    std::int64_t lost_in_emission = 0;  // whole periods skipped
};

struct FlaggedFrame {
    TraceEvent row;
    std::string reason;
};

struct MonitorReport {
    std::vector<VlReport> vls;
    std::vector<PathReport> paths;
    std::vector<FlaggedFrame> flagged;  // deliveries above WCTT
    std::vector<std::string> issues;
    Ns window_begin = 0;
    Ns window_end = 0;
};

/// Folds the three monitors over a trace: latency bounds per path,
/// jitter classes per VL, drop counts from sequence gaps. Topology
/// supplies the per-VL parameters and channel bounds.
MonitorReport monitor_report(const TraceLog& trace, const TopologySpec& topo,
                             const ReportOptions& options = {});

std::string report_to_json(const MonitorReport& report);
std::string report_to_table(const MonitorReport& report, const TopologySpec& topo);

/// Same columns as the trace CSV plus a trailing `reason`.
void write_flagged_csv(std::ostream& out, std::span<const FlaggedFrame> flagged);

}  // namespace afdx
