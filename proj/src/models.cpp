#include "afdx/models.hpp"

#include <algorithm>
#include <functional>

namespace afdx {

const VirtualLinkSpec* TopologySpec::find_vl(VlId id) const {
    for (const auto& vl : vls)
        if (vl.vl_id == id) return &vl;
    return nullptr;
}

const SwitchSpec* TopologySpec::find_switch(const std::string& id) const {
    for (const auto& sw : switches)
        if (sw.id == id) return &sw;
    return nullptr;
}

const TimedChannelSpec* TopologySpec::find_channel(VlId vl, EsId dest, Net net) const {
    for (const auto& ch : channels)
        if (ch.vl_id == vl && ch.dest == dest && ch.net == net) return &ch;
    return nullptr;
}

std::vector<const TimedChannelSpec*> TopologySpec::channels_of(VlId vl) const {
    std::vector<const TimedChannelSpec*> out;
    for (const auto& ch : channels)
        if (ch.vl_id == vl) out.push_back(&ch);
    return out;
}

std::optional<TopologySpec::Attachment> TopologySpec::attachment_of(EsId es) const {
    for (std::size_t i = 0; i < switches.size(); ++i)
        for (const auto& [port, peer] : switches[i].ports)
            if (peer.kind == PortPeer::Kind::EndSystem && peer.es == es)
                return Attachment{i, port};
    return std::nullopt;
}

std::string TopologySpec::es_label(EsId es) const {
    auto it = es_names.find(es);
    if (it != es_names.end()) return it->second;
    return "ES" + std::to_string(es);
}

const FlowEntry* route(const SwitchSpec& sw, PortId in_port, const Mac& dest_mac) {
    for (const auto& entry : sw.flow_table)
        if (entry.in_port == in_port && entry.match_dest_mac == dest_mac) return &entry;
    return nullptr;
}

Ns channel_delay(const TimedChannelSpec& ch, rng::Stream& stream) {
    return stream.uniform_ns(ch.bctt, ch.wctt);
}

Ns period_base(Ns bag, std::int64_t period_index, std::int64_t speed_num,
               std::int64_t speed_den) {
    const __int128 scaled = static_cast<__int128>(period_index) * bag * speed_den;
    return static_cast<Ns>(scaled / speed_num);
}

Ns tx_emission_time(const VirtualLinkSpec& vl, std::int64_t period_index, std::int64_t speed_num,
                    std::int64_t speed_den, rng::Stream& jitter_stream) {
    return period_base(vl.bag, period_index, speed_num, speed_den) +
           jitter_stream.uniform_ns(0, vl.j_max);
}

RxVerdict redundancy_accept(RedundancyState& state, std::uint8_t seq, Ns t, Ns bag_window) {
    if (state.seen && state.last_seq == seq && t - state.last_time <= bag_window)
        return RxVerdict::Discard;
    state.seen = true;
    state.last_seq = seq;
    state.last_time = t;
    return RxVerdict::Accept;
}

PathMap compute_paths(const TopologySpec& topo) {
    PathMap map;
    for (const auto& vl : topo.vls) {
        const Mac mac = encode_dest_mac(vl.vl_id);
        const auto attach = topo.attachment_of(vl.source);
        if (topo.switches.empty()) continue;
        if (!attach) {
            map.errors.push_back("VL " + std::to_string(vl.vl_id) + ": source ES " +
                                 std::to_string(vl.source) + " not attached to any switch");
            continue;
        }
        // depth-first walk along flow-table matches
        std::function<void(std::size_t, PortId, std::vector<std::size_t>&)> walk =
            [&](std::size_t sw_idx, PortId in_port, std::vector<std::size_t>& hops) {
                if (hops.size() >= 32) {
                    map.errors.push_back("VL " + std::to_string(vl.vl_id) +
                                         ": path exceeds 32 hops (loop?)");
                    return;
                }
                const SwitchSpec& sw = topo.switches[sw_idx];
                const FlowEntry* entry = route(sw, in_port, mac);
                if (!entry) return;  // filtered here; reachability checked below
                hops.push_back(sw_idx);
                for (PortId out : entry->out_ports) {
                    const auto peer_it = sw.ports.find(out);
                    if (peer_it == sw.ports.end()) {
                        map.errors.push_back("VL " + std::to_string(vl.vl_id) + ": switch " +
                                             sw.id + " forwards to unwired port " +
                                             std::to_string(out));
                        continue;
                    }
                    const PortPeer& peer = peer_it->second;
                    if (peer.kind == PortPeer::Kind::EndSystem) {
                        const auto key = std::make_pair(vl.vl_id, peer.es);
                        if (std::find(vl.destinations.begin(), vl.destinations.end(), peer.es) ==
                            vl.destinations.end()) {
                            map.errors.push_back("VL " + std::to_string(vl.vl_id) +
                                                 ": delivered to non-destination ES " +
                                                 std::to_string(peer.es));
                        } else if (map.paths.count(key)) {
                            map.errors.push_back("VL " + std::to_string(vl.vl_id) +
                                                 ": destination ES " + std::to_string(peer.es) +
                                                 " reached on more than one path");
                        } else {
                            map.paths[key] = HopPath{hops};
                        }
                    } else {
                        const SwitchSpec* next = topo.find_switch(peer.sw);
                        if (!next) {
                            map.errors.push_back("switch " + sw.id + " port " +
                                                 std::to_string(out) + " wired to unknown switch " +
                                                 peer.sw);
                            continue;
                        }
                        walk(static_cast<std::size_t>(next - topo.switches.data()), peer.sw_port,
                             hops);
                    }
                }
                hops.pop_back();
            };
        std::vector<std::size_t> hops;
        walk(attach->switch_index, attach->port, hops);
        for (EsId dst : vl.destinations)
            if (!map.paths.count({vl.vl_id, dst}))
                map.errors.push_back("VL " + std::to_string(vl.vl_id) + ": destination ES " +
                                     std::to_string(dst) + " unreachable through the flow tables");
    }
    return map;
}

std::optional<HopCalibration> calibrate_path(const TopologySpec& topo, const VirtualLinkSpec& vl,
                                             const HopPath& path, const TimedChannelSpec& channel,
                                             std::string* error) {
    HopCalibration cal;
    cal.per_hop.resize(path.switch_indices.size());
    const Ns tx = transmission_time_ns(ByteSize::from_bytes(vl.s_max.ceil_bytes())).round_i64();
    const auto hops = static_cast<std::int64_t>(path.switch_indices.size());
    Ns fixed_min = hops * tx;
    Ns fixed_max = hops * tx;
    std::int64_t free_hops = 0;
    for (std::size_t i = 0; i < path.switch_indices.size(); ++i) {
        const SwitchSpec& sw = topo.switches[path.switch_indices[i]];
        fixed_max += sw.output_processing_max;
        if (sw.tech_latency_override) {
            cal.per_hop[i] = *sw.tech_latency_override;
            fixed_min += sw.tech_latency_override->first;
            fixed_max += sw.tech_latency_override->second;
        } else {
            ++free_hops;
        }
    }
    if (free_hops == 0) return cal;
    // ceil the lower split and floor the upper so the sum stays inside
    const Ns lo_total = channel.bctt - fixed_min;
    const Ns hi_total = channel.wctt - fixed_max;
    const Ns lo = lo_total <= 0 ? 0 : (lo_total + free_hops - 1) / free_hops;
    const Ns hi = hi_total / free_hops;
    if (hi < lo || hi < 0) {
        if (error)
            *error = "VL " + std::to_string(vl.vl_id) + " -> ES " + std::to_string(channel.dest) +
                     ": cannot fit " + std::to_string(hops) + " hops into [" +
                     format_ns_as_us(channel.bctt) + ", " + format_ns_as_us(channel.wctt) + "] us";
        return std::nullopt;
    }
    for (std::size_t i = 0; i < cal.per_hop.size(); ++i)
        if (!topo.switches[path.switch_indices[i]].tech_latency_override)
            cal.per_hop[i] = {lo, hi};
    return cal;
}

void synthesize_missing_channels(TopologySpec& topo, const SyntheticBounds& bounds) {
    for (const auto& vl : topo.vls) {
        const Ns tx = transmission_time_ns(ByteSize::from_bytes(vl.s_max.ceil_bytes())).round_i64();
        for (EsId dst : vl.destinations) {
            if (topo.find_channel(vl.vl_id, dst)) continue;
            TimedChannelSpec ch;
            ch.vl_id = vl.vl_id;
            ch.source = vl.source;
            ch.dest = dst;
            ch.bctt = tx + bounds.margin_min;
            ch.wctt = tx + bounds.margin_max;
            topo.channels.push_back(ch);
        }
    }
}

std::vector<std::string> validate_topology(const TopologySpec& topo) {
    std::vector<std::string> problems;
    std::set<VlId> seen_vls;
    for (const auto& vl : topo.vls) {
        if (!seen_vls.insert(vl.vl_id).second)
            problems.push_back("duplicate VL id " + std::to_string(vl.vl_id));
        for (const auto& v : validate_vl(vl))
            problems.push_back("VL " + std::to_string(vl.vl_id) + ": " + v);
    }
    for (const auto& ch : topo.channels) {
        const VirtualLinkSpec* vl = topo.find_vl(ch.vl_id);
        if (!vl) {
            problems.push_back("channel for unknown VL " + std::to_string(ch.vl_id));
            continue;
        }
        if (ch.bctt <= 0 || ch.wctt < ch.bctt)
            problems.push_back("VL " + std::to_string(ch.vl_id) + " -> ES " +
                               std::to_string(ch.dest) + ": bounds must satisfy 0 < bctt <= wctt");
        if (ch.wctt >= vl->bag)
            problems.push_back("VL " + std::to_string(ch.vl_id) + " -> ES " +
                               std::to_string(ch.dest) + ": wctt must be smaller than the bag");
    }
    for (const auto& sw : topo.switches) {
        std::set<std::pair<PortId, Mac>> keys;
        for (const auto& entry : sw.flow_table) {
            if (!keys.insert({entry.in_port, entry.match_dest_mac}).second)
                problems.push_back("switch " + sw.id + ": duplicate flow entry for (port " +
                                   std::to_string(entry.in_port) + ", " +
                                   mac_to_string(entry.match_dest_mac) + ")");
            if (entry.out_ports.empty())
                problems.push_back("switch " + sw.id + ": flow entry with no output ports");
            std::set<PortId> outs(entry.out_ports.begin(), entry.out_ports.end());
            if (outs.size() != entry.out_ports.size())
                problems.push_back("switch " + sw.id + ": duplicate output port in flow entry");
        }
        if (sw.tech_latency_override &&
            (sw.tech_latency_override->first < 0 ||
             sw.tech_latency_override->second < sw.tech_latency_override->first))
            problems.push_back("switch " + sw.id + ": bad tech latency interval");
    }
    if (!topo.switches.empty()) {
        const PathMap paths = compute_paths(topo);
        problems.insert(problems.end(), paths.errors.begin(), paths.errors.end());
        // the policer must sit on the first switch of each path
        for (const auto& vl : topo.vls) {
            const auto attach = topo.attachment_of(vl.source);
            if (!attach) continue;
            for (const auto& sw : topo.switches)
                if (sw.policed_vls.count(vl.vl_id) && sw.id != topo.switches[attach->switch_index].id)
                    problems.push_back("VL " + std::to_string(vl.vl_id) + " policed at switch " +
                                       sw.id + " which is not the first on its path");
        }
    }
    return problems;
}

TopologySpec build_many_to_one(std::vector<VirtualLinkSpec> vls,
                               std::map<EsId, std::string> es_names,
                               std::vector<TimedChannelSpec> channels) {
    TopologySpec topo;
    topo.vls = std::move(vls);
    topo.es_names = std::move(es_names);
    topo.channels = std::move(channels);

    std::set<EsId> es_set;
    for (const auto& vl : topo.vls) {
        es_set.insert(vl.source);
        es_set.insert(vl.destinations.begin(), vl.destinations.end());
    }
    SwitchSpec sw;
    sw.id = "S1";
    std::map<EsId, PortId> port_of;
    PortId next_port = 1;
    for (EsId es : es_set) {
        port_of[es] = next_port;
        sw.ports[next_port] = PortPeer{PortPeer::Kind::EndSystem, es, "", 0};
        ++next_port;
    }
    for (const auto& vl : topo.vls) {
        FlowEntry entry;
        entry.in_port = port_of[vl.source];
        entry.match_dest_mac = encode_dest_mac(vl.vl_id);
        for (EsId dst : vl.destinations) entry.out_ports.push_back(port_of[dst]);
        sw.flow_table.push_back(entry);
        sw.policed_vls.insert(vl.vl_id);
    }
    topo.switches.push_back(std::move(sw));
    return topo;
}

}  // namespace afdx
