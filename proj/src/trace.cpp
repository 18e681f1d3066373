#include "afdx/trace.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

namespace afdx {

std::string_view trace_kind_name(TraceKind kind) {
    switch (kind) {
        case TraceKind::Emitted: return "emitted";
        case TraceKind::Accepted: return "accepted";
        case TraceKind::Rejected: return "rejected";
        case TraceKind::Filtered: return "filtered";
        case TraceKind::Delivered: return "delivered";
        case TraceKind::DiscardedDup: return "discarded_dup";
        case TraceKind::SkippedPeriod: return "skipped_period";
    }
    return "?";
}

std::optional<TraceKind> trace_kind_from(std::string_view name) {
    for (auto kind : {TraceKind::Emitted, TraceKind::Accepted, TraceKind::Rejected,
                      TraceKind::Filtered, TraceKind::Delivered, TraceKind::DiscardedDup,
                      TraceKind::SkippedPeriod})
        if (trace_kind_name(kind) == name) return kind;
    return std::nullopt;
}

static constexpr std::string_view kHeader = "time_ns,event,vl_id,src,dst,seq,latency_ns";

void write_trace_csv(std::ostream& out, const TraceLog& log) {
    out << kHeader << '\n';
    for (const TraceEvent& ev : log) {
        out << ev.time << ',' << trace_kind_name(ev.event) << ',' << ev.vl_id << ',' << ev.src
            << ',';
        if (ev.dst)
            out << *ev.dst;
        else
            out << '*';
        out << ',' << static_cast<unsigned>(ev.seq) << ',';
        if (ev.latency) out << *ev.latency;
        out << '\n';
    }
}

std::string trace_to_csv(const TraceLog& log) {
    std::ostringstream out;
    write_trace_csv(out, log);
    return out.str();
}

namespace {

template <typename T>
bool parse_int(std::string_view field, T& out) {
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && p == field.data() + field.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

}  // namespace

TraceParseResult parse_trace_csv(std::string_view text) {
    TraceParseResult result;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line =
            eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kHeader)
                result.issues.push_back({line_no, "bad header (expected " + std::string(kHeader) + ")"});
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 7) {
            result.issues.push_back({line_no, "expected 7 fields, got " +
                                                  std::to_string(fields.size())});
            continue;
        }
        TraceEvent ev;
        unsigned seq = 0;
        std::uint16_t vl = 0;
        if (!parse_int(fields[0], ev.time)) {
            result.issues.push_back({line_no, "bad time_ns"});
            continue;
        }
        const auto kind = trace_kind_from(fields[1]);
        if (!kind) {
            result.issues.push_back({line_no, "unknown event '" + std::string(fields[1]) + "'"});
            continue;
        }
        ev.event = *kind;
        if (!parse_int(fields[2], vl)) {
            result.issues.push_back({line_no, "bad vl_id"});
            continue;
        }
        ev.vl_id = vl;
        if (!parse_int(fields[3], ev.src)) {
            result.issues.push_back({line_no, "bad src"});
            continue;
        }
        if (fields[4] != "*") {
            EsId dst = 0;
            if (!parse_int(fields[4], dst)) {
                result.issues.push_back({line_no, "bad dst"});
                continue;
            }
            ev.dst = dst;
        }
        if (!parse_int(fields[5], seq) || seq > 255) {
            result.issues.push_back({line_no, "bad seq"});
            continue;
        }
        ev.seq = static_cast<std::uint8_t>(seq);
        if (!fields[6].empty()) {
            Ns latency = 0;
            if (!parse_int(fields[6], latency)) {
                result.issues.push_back({line_no, "bad latency_ns"});
                continue;
            }
            ev.latency = latency;
        }
        result.log.push_back(ev);
    }
    return result;
}

}  // namespace afdx
