#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afdx/core.hpp"

namespace afdx {

enum class TraceKind : std::uint8_t {
    Emitted,
    Accepted,      // passed traffic policing
    Rejected,      // dropped by traffic policing
    Filtered,      // no flow-table match
    Delivered,
    DiscardedDup,  // redundancy management
    SkippedPeriod,
};

std::string_view trace_kind_name(TraceKind kind);
std::optional<TraceKind> trace_kind_from(std::string_view name);

/// One timestamped state change. Frame-level records (emitted,
/// accepted, rejected, filtered, skipped_period) have no destination;
/// delivered and discarded_dup are per receiving ES. Latency is only
/// present on deliveries: delivery time minus the emission timestamp
/// carried in the frame.
struct TraceEvent {
    Ns time = 0;
    TraceKind event = TraceKind::Emitted;
    VlId vl_id = 0;
    EsId src = 0;
    std::optional<EsId> dst;
    std::uint8_t seq = 0;
    std::optional<Ns> latency;

    bool operator==(const TraceEvent&) const = default;
};

using TraceLog = std::vector<TraceEvent>;

/// CSV with header `time_ns,event,vl_id,src,dst,seq,latency_ns`; one
/// row per event, `*` for the frame-level destination, empty latency
/// on non-delivery rows.
void write_trace_csv(std::ostream& out, const TraceLog& log);
std::string trace_to_csv(const TraceLog& log);

struct TraceParseIssue {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct TraceParseResult {
    TraceLog log;
    std::vector<TraceParseIssue> issues;
};

TraceParseResult parse_trace_csv(std::string_view text);

}  // namespace afdx
