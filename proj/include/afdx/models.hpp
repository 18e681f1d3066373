#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "afdx/core.hpp"
#include "afdx/rng.hpp"

namespace afdx {

/// Redundant network plane. Single-plane topologies use A only.
enum class Net : std::uint8_t { A, B };

/// One VL path abstracted as a delay in [bctt, wctt].
struct TimedChannelSpec {
    VlId vl_id = 0;
    EsId source = 0;
    EsId dest = 0;
    Net net = Net::A;
    Ns bctt = 0;
    Ns wctt = 0;
    std::string name;  // e.g. "C1"
};

/// Static switch rule: exact (in_port, destination MAC) match, one or
/// more output ports for multicast.
struct FlowEntry {
    PortId in_port = 0;
    Mac match_dest_mac{};
    std::vector<PortId> out_ports;
};

/// What a switch port is wired to.
struct PortPeer {
    enum class Kind : std::uint8_t { EndSystem, Switch };
    Kind kind = Kind::EndSystem;
    EsId es = 0;          // when kind == EndSystem
    std::string sw;       // when kind == Switch
    PortId sw_port = 0;
};

struct SwitchSpec {
    std::string id;
    std::vector<FlowEntry> flow_table;
    std::map<PortId, PortPeer> ports;
    std::set<VlId> policed_vls;  // the first switch on a VL's path polices it
    /// Per-hop technological latency [min,max]; when absent the engine
    /// calibrates it per VL path from the channel bounds.
    std::optional<std::pair<Ns, Ns>> tech_latency_override;
    Ns output_processing_max = 100;  // 0.1 us
};

struct TopologySpec {
    std::map<EsId, std::string> es_names;  // optional sidecar name map
    std::vector<VirtualLinkSpec> vls;
    std::vector<SwitchSpec> switches;
    std::vector<TimedChannelSpec> channels;

    const VirtualLinkSpec* find_vl(VlId id) const;
    const SwitchSpec* find_switch(const std::string& id) const;
    const TimedChannelSpec* find_channel(VlId vl, EsId dest, Net net = Net::A) const;
    std::vector<const TimedChannelSpec*> channels_of(VlId vl) const;

    struct Attachment {
        std::size_t switch_index = 0;
        PortId port = 0;
    };
    /// The switch port an ES hangs off (switched model).
    std::optional<Attachment> attachment_of(EsId es) const;

    std::string es_label(EsId es) const;
};

/// Exact-match lookup; nullptr means the frame is filtered.
const FlowEntry* route(const SwitchSpec& sw, PortId in_port, const Mac& dest_mac);

/// Uniform draw from the channel's [bctt, wctt].
Ns channel_delay(const TimedChannelSpec& ch, rng::Stream& stream);

/// Emission date of period i: i * (bag / speed) + jitter drawn from
/// [0, j_max]. Speed is a rational factor; jitter does not scale.
Ns tx_emission_time(const VirtualLinkSpec& vl, std::int64_t period_index,
                    std::int64_t speed_num, std::int64_t speed_den, rng::Stream& jitter_stream);

/// Scheduled (jitter-free) start of period i.
Ns period_base(Ns bag, std::int64_t period_index, std::int64_t speed_num,
               std::int64_t speed_den);

/// First-valid-frame-wins duplicate elimination at a receiving ES.
/// A second arrival with the accepted sequence number inside one BAG
/// window is discarded; later reuse of the number is a fresh frame.
struct RedundancyState {
    bool seen = false;
    std::uint8_t last_seq = 0;
    Ns last_time = 0;
};

enum class RxVerdict { Accept, Discard };

RxVerdict redundancy_accept(RedundancyState& state, std::uint8_t seq, Ns t, Ns bag_window);

/// Switch hops of one VL path, source-side first.
struct HopPath {
    std::vector<std::size_t> switch_indices;
};

/// Walks the flow tables from the source attachment and returns the
/// hop path per destination. Structural problems (unreachable
/// destination, loop, stray delivery) come back as messages.
struct PathMap {
    std::map<std::pair<VlId, EsId>, HopPath> paths;
    std::vector<std::string> errors;
};
PathMap compute_paths(const TopologySpec& topo);

/// Per-hop technological latency interval for one (vl, dest) path,
/// chosen so the end-to-end delay lands inside the channel's
/// [bctt, wctt]: overridden hops use their switch setting and the
/// remaining slack is split evenly across the free hops.
struct HopCalibration {
    std::vector<std::pair<Ns, Ns>> per_hop;  // aligned with HopPath
};
/// Empty on infeasible bounds; the reason lands in `error`.
std::optional<HopCalibration> calibrate_path(const TopologySpec& topo, const VirtualLinkSpec& vl,
                                             const HopPath& path, const TimedChannelSpec& channel,
                                             std::string* error);

/// Structural and per-VL validation for the given model level
/// requirements ("tc" needs channels, "svl" needs a routable fabric).
std::vector<std::string> validate_topology(const TopologySpec& topo);

/// Missing (vl, dest) channel bounds get synthetic defaults derived
/// from the frame transmission time plus a margin.
struct SyntheticBounds {
    Ns margin_min = 100 * kUs;
    Ns margin_max = 300 * kUs;
};
void synthesize_missing_channels(TopologySpec& topo, const SyntheticBounds& bounds = {});

/// Single-switch fabric for a VL set: every ES gets one port on the
/// shared switch, one flow entry per VL, policing at that switch.
TopologySpec build_many_to_one(std::vector<VirtualLinkSpec> vls,
                               std::map<EsId, std::string> es_names = {},
                               std::vector<TimedChannelSpec> channels = {});

}  // namespace afdx
