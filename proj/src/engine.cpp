#include "afdx/engine.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <queue>
#include <thread>
#include <vector>

#include "afdx/policing.hpp"

namespace afdx {

std::string_view model_level_name(ModelLevel level) {
    switch (level) {
        case ModelLevel::TimedChannel: return "tc";
        case ModelLevel::DirectVl: return "dvl";
        case ModelLevel::SwitchedVl: return "svl";
    }
    return "?";
}

std::optional<ModelLevel> model_level_from(std::string_view name) {
    if (name == "tc" || name == "timed_channel") return ModelLevel::TimedChannel;
    if (name == "dvl" || name == "direct_vl") return ModelLevel::DirectVl;
    if (name == "svl" || name == "switched_vl") return ModelLevel::SwitchedVl;
    return std::nullopt;
}

namespace {

class SteadyClock final : public Clock {
  public:
    SteadyClock() : epoch_(std::chrono::steady_clock::now()) {}
    Ns now() override {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::steady_clock::now() - epoch_)
            .count();
    }
    void sleep_until(Ns t) override {
        std::this_thread::sleep_until(epoch_ + std::chrono::nanoseconds(t));
    }

  private:
    std::chrono::steady_clock::time_point epoch_;
};

enum class EventKind : std::uint8_t { Emit, ChannelExit, HopForward, PolicingInternal, Deliver };

struct Event {
    Ns due = 0;
    std::uint64_t order = 0;  // insertion sequence; ties dispatch in insertion order
    EventKind kind = EventKind::Emit;
    Frame frame;
    std::size_t vl_index = 0;       // Emit
    std::int64_t period = 0;        // Emit
    std::size_t channel_index = 0;  // ChannelExit
    std::size_t switch_index = 0;   // HopForward
    PortId in_port = 0;             // HopForward
    std::size_t hop_index = 0;      // HopForward
    EsId dest = 0;                  // ChannelExit / Deliver
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.due != b.due) return a.due > b.due;
        return a.order > b.order;
    }
};

class Engine {
  public:
    Engine(const Scenario& scenario, Clock* clock)
        : sc_(scenario), topo_(scenario.topology), clock_(clock) {
        if (sc_.duration <= 0) throw EngineError("duration must be positive");
        if (sc_.speed_num <= 0 || sc_.speed_den <= 0) throw EngineError("speed must be positive");
        for (std::size_t i = 0; i < topo_.vls.size(); ++i) vl_index_of_[topo_.vls[i].vl_id] = i;
        prepare();
    }

    RunResult run() {
        RunResult result;
        for (std::size_t i = 0; i < topo_.vls.size(); ++i) schedule_emit(i, 0);
        PacingReport report;
        Ns drift_sum = 0;
        while (!queue_.empty()) {
            const Event ev = queue_.top();
            queue_.pop();
            if (clock_) {
                clock_->sleep_until(ev.due);
                const Ns drift = std::max<Ns>(clock_->now() - ev.due, 0);
                drift_sum += drift;
                report.max_drift = std::max(report.max_drift, drift);
                ++report.events;
            }
            dispatch(ev);
        }
        if (clock_) {
            report.elapsed = clock_->now();
            report.mean_drift = report.events ? drift_sum / static_cast<Ns>(report.events) : 0;
            report.bound_exceeded = report.max_drift > report.drift_bound;
            result.pacing = report;
        }
        result.trace = std::move(trace_);
        return result;
    }

  private:
    struct VlState {
        rng::Stream jitter;
        std::uint8_t seq = 0;
        std::optional<AutomatonPolicer> policer;  // switched model, first switch only
        explicit VlState(std::uint64_t seed) : jitter(seed) {}
    };

    void prepare() {
        for (const VirtualLinkSpec& vl : topo_.vls) {
            vls_.emplace_back(
                rng::derive(sc_.seed, vl.vl_id, static_cast<std::uint64_t>(rng::Purpose::Jitter)));
            for (EsId dst : vl.destinations)
                channel_streams_.emplace(
                    std::piecewise_construct, std::forward_as_tuple(vl.vl_id, dst),
                    std::forward_as_tuple(rng::derive(
                        sc_.seed, vl.vl_id, static_cast<std::uint64_t>(rng::Purpose::ChannelDelay),
                        dst)));
            tech_streams_.emplace(
                std::piecewise_construct, std::forward_as_tuple(vl.vl_id),
                std::forward_as_tuple(rng::derive(
                    sc_.seed, vl.vl_id, static_cast<std::uint64_t>(rng::Purpose::TechLatency))));
            proc_streams_.emplace(
                std::piecewise_construct, std::forward_as_tuple(vl.vl_id),
                std::forward_as_tuple(rng::derive(
                    sc_.seed, vl.vl_id,
                    static_cast<std::uint64_t>(rng::Purpose::OutputProcessing))));
        }
        switch (sc_.model) {
            case ModelLevel::TimedChannel:
            case ModelLevel::DirectVl:
                for (const auto& vl : topo_.vls)
                    for (EsId dst : vl.destinations)
                        if (!topo_.find_channel(vl.vl_id, dst))
                            throw EngineError("VL " + std::to_string(vl.vl_id) + " -> ES " +
                                              std::to_string(dst) +
                                              ": no channel bounds for this model level");
                if (sc_.model == ModelLevel::TimedChannel)
                    channel_busy_until_.assign(topo_.channels.size(), INT64_MIN);
                break;
            case ModelLevel::SwitchedVl: prepare_switched(); break;
        }
    }

    void prepare_switched() {
        if (topo_.switches.empty())
            throw EngineError("switched model requires at least one switch");
        paths_ = compute_paths(topo_);
        attach_.resize(topo_.vls.size());
        for (std::size_t i = 0; i < topo_.vls.size(); ++i) {
            const VirtualLinkSpec& vl = topo_.vls[i];
            const auto attach = topo_.attachment_of(vl.source);
            if (!attach)
                throw EngineError("VL " + std::to_string(vl.vl_id) + ": source ES " +
                                  std::to_string(vl.source) + " not attached to a switch");
            attach_[i] = *attach;
            if (topo_.switches[attach->switch_index].policed_vls.count(vl.vl_id))
                vls_[i].policer.emplace(BucketParams::for_vl(vl));
            for (EsId dst : vl.destinations) {
                const auto key = std::make_pair(vl.vl_id, dst);
                const auto path_it = paths_.paths.find(key);
                if (path_it == paths_.paths.end()) continue;  // filtered at run time
                const TimedChannelSpec* ch = topo_.find_channel(vl.vl_id, dst);
                std::string error;
                std::optional<HopCalibration> cal;
                if (!ch) {
                    // feasible only when every hop carries an override
                    const bool all_fixed =
                        std::all_of(path_it->second.switch_indices.begin(),
                                    path_it->second.switch_indices.end(), [&](std::size_t s) {
                                        return topo_.switches[s].tech_latency_override.has_value();
                                    });
                    if (!all_fixed)
                        throw EngineError("VL " + std::to_string(vl.vl_id) + " -> ES " +
                                          std::to_string(dst) +
                                          ": no channel bounds to calibrate the switched path");
                    TimedChannelSpec unbounded;
                    unbounded.vl_id = vl.vl_id;
                    unbounded.dest = dst;
                    cal = calibrate_path(topo_, vl, path_it->second, unbounded, &error);
                } else {
                    cal = calibrate_path(topo_, vl, path_it->second, *ch, &error);
                }
                if (!cal) throw EngineError(error);
                calibrations_[key] = std::move(*cal);
                // trunk hops (switch to switch) draw from the calibration
                // of one governing destination; validation requires the
                // bounds to agree when a trunk is shared
                const auto& hops = path_it->second.switch_indices;
                for (std::size_t h = 0; h + 1 < hops.size(); ++h) {
                    const auto branch = std::make_tuple(vl.vl_id, hops[h], hops[h + 1]);
                    const auto it = branch_dst_.find(branch);
                    if (it == branch_dst_.end() || dst < it->second) branch_dst_[branch] = dst;
                }
            }
        }
    }

    Ns emission_time(std::size_t vl_index, std::int64_t period) {
        const VirtualLinkSpec& vl = topo_.vls[vl_index];
        if (sc_.model == ModelLevel::TimedChannel)  // jitter-free at this level
            return period_base(vl.bag, period, sc_.speed_num, sc_.speed_den);
        return tx_emission_time(vl, period, sc_.speed_num, sc_.speed_den, vls_[vl_index].jitter);
    }

    void schedule_emit(std::size_t vl_index, std::int64_t period) {
        const VirtualLinkSpec& vl = topo_.vls[vl_index];
        if (period_base(vl.bag, period, sc_.speed_num, sc_.speed_den) >= sc_.duration) return;
        Event ev;
        ev.kind = EventKind::Emit;
        ev.due = emission_time(vl_index, period);
        ev.vl_index = vl_index;
        ev.period = period;
        push(ev);
    }

    void push(Event ev) {
        ev.order = next_order_++;
        queue_.push(ev);
    }

    void record(Ns time, TraceKind kind, const Frame& frame, std::optional<EsId> dst,
                std::optional<Ns> latency = std::nullopt) {
        const EsId src = topo_.vls[vl_index_of_.at(frame.vl_id)].source;
        trace_.push_back(TraceEvent{time, kind, frame.vl_id, src, dst, frame.seq_no, latency});
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::Emit: on_emit(ev); break;
            case EventKind::ChannelExit:
            case EventKind::Deliver: on_deliver(ev); break;
            case EventKind::HopForward:
                on_switch(ev.frame, ev.switch_index, ev.in_port, ev.hop_index, ev.due);
                break;
            case EventKind::PolicingInternal: break;  // policers catch up lazily
        }
    }

    void on_emit(const Event& ev) {
        const std::size_t i = ev.vl_index;
        const VirtualLinkSpec& vl = topo_.vls[i];
        VlState& state = vls_[i];
        state.seq = next_seq(state.seq);
        Frame frame;
        frame.vl_id = vl.vl_id;
        frame.seq_no = state.seq;
        frame.emit_time = ev.due;
        frame.size_bytes = vl.s_max.ceil_bytes();
        record(ev.due, TraceKind::Emitted, frame, std::nullopt);
        switch (sc_.model) {
            case ModelLevel::TimedChannel: emit_timed_channel(frame, ev.due); break;
            case ModelLevel::DirectVl: emit_direct(vl, frame, ev.due); break;
            case ModelLevel::SwitchedVl:
                on_switch(frame, attach_[i].switch_index, attach_[i].port, 0, ev.due);
                break;
        }
        schedule_emit(i, ev.period + 1);
    }

    void emit_timed_channel(const Frame& frame, Ns t) {
        for (std::size_t c = 0; c < topo_.channels.size(); ++c) {
            const TimedChannelSpec& ch = topo_.channels[c];
            if (ch.vl_id != frame.vl_id) continue;
            if (channel_busy_until_[c] > t)
                throw EngineFault("channel occupancy violation on " +
                                  (ch.name.empty()
                                       ? "VL " + std::to_string(ch.vl_id) + " -> ES " +
                                             std::to_string(ch.dest)
                                       : ch.name) +
                                  ": frame enters at " + std::to_string(t) +
                                  " ns while busy until " + std::to_string(channel_busy_until_[c]) +
                                  " ns");
            const Ns exit_time = t + channel_delay(ch, channel_stream(frame.vl_id, ch.dest));
            channel_busy_until_[c] = exit_time;
            Event out;
            out.kind = EventKind::ChannelExit;
            out.due = exit_time;
            out.frame = frame;
            out.channel_index = c;
            out.dest = ch.dest;
            push(out);
        }
    }

    void emit_direct(const VirtualLinkSpec& vl, const Frame& frame, Ns t) {
        for (EsId dst : vl.destinations) {
            const TimedChannelSpec* ch = topo_.find_channel(vl.vl_id, dst);
            Event out;
            out.kind = EventKind::Deliver;
            out.due = t + channel_delay(*ch, channel_stream(vl.vl_id, dst));
            out.frame = frame;
            out.dest = dst;
            push(out);
        }
    }

    void on_switch(const Frame& frame, std::size_t sw_index, PortId in_port,
                   std::size_t hop_index, Ns t) {
        const SwitchSpec& sw = topo_.switches[sw_index];
        const std::size_t vl_index = vl_index_of_.at(frame.vl_id);
        if (sw.policed_vls.count(frame.vl_id) && vls_[vl_index].policer &&
            sw_index == attach_[vl_index].switch_index) {
            const Decision decision = vls_[vl_index].policer->on_frame(t);
            record(t, decision == Decision::Accept ? TraceKind::Accepted : TraceKind::Rejected,
                   frame, std::nullopt);
            if (decision == Decision::Reject) return;
        }
        const FlowEntry* entry = route(sw, in_port, encode_dest_mac(frame.vl_id));
        if (!entry) {
            record(t, TraceKind::Filtered, frame, std::nullopt);
            return;
        }
        const Ns tx = transmission_time_ns(ByteSize::from_bytes(frame.size_bytes)).round_i64();
        for (PortId out_port : entry->out_ports) {
            const auto peer_it = sw.ports.find(out_port);
            if (peer_it == sw.ports.end())
                throw EngineFault("switch " + sw.id + " forwards to unwired port " +
                                  std::to_string(out_port) + " (topology not validated?)");
            const PortPeer& peer = peer_it->second;
            const SwitchSpec* next_sw =
                peer.kind == PortPeer::Kind::Switch ? topo_.find_switch(peer.sw) : nullptr;
            if (peer.kind == PortPeer::Kind::Switch && !next_sw)
                throw EngineFault("switch " + sw.id + " port " + std::to_string(out_port) +
                                  " wired to unknown switch " + peer.sw);
            EsId governing_dst = 0;
            if (peer.kind == PortPeer::Kind::EndSystem) {
                governing_dst = peer.es;
            } else {
                const auto branch = std::make_tuple(
                    frame.vl_id, sw_index, static_cast<std::size_t>(next_sw - topo_.switches.data()));
                const auto it = branch_dst_.find(branch);
                if (it == branch_dst_.end())
                    throw EngineFault("VL " + std::to_string(frame.vl_id) +
                                      ": forwarding reached an uncalibrated trunk at switch " +
                                      sw.id + " (topology not validated?)");
                governing_dst = it->second;
            }
            const auto cal = calibrations_.find({frame.vl_id, governing_dst});
            if (cal == calibrations_.end())
                throw EngineFault("VL " + std::to_string(frame.vl_id) +
                                  ": no calibrated path toward ES " +
                                  std::to_string(governing_dst) + " (topology not validated?)");
            if (hop_index >= cal->second.per_hop.size())
                throw EngineFault("VL " + std::to_string(frame.vl_id) +
                                  ": forwarding ran past its calibrated path at switch " + sw.id +
                                  " (flow-table loop?)");
            const auto [tech_lo, tech_hi] = cal->second.per_hop[hop_index];
            const Ns tech = tech_streams_.at(frame.vl_id).uniform_ns(tech_lo, tech_hi);
            const Ns proc = proc_streams_.at(frame.vl_id).uniform_ns(0, sw.output_processing_max);
            Event out;
            out.frame = frame;
            out.due = t + tech + proc + tx;
            if (peer.kind == PortPeer::Kind::EndSystem) {
                out.kind = EventKind::Deliver;
                out.dest = peer.es;
            } else {
                out.kind = EventKind::HopForward;
                out.switch_index = static_cast<std::size_t>(next_sw - topo_.switches.data());
                out.in_port = peer.sw_port;
                out.hop_index = hop_index + 1;
            }
            push(out);
        }
    }

    void on_deliver(const Event& ev) {
        const VirtualLinkSpec& vl = topo_.vls[vl_index_of_.at(ev.frame.vl_id)];
        RedundancyState& red = redundancy_[{ev.frame.vl_id, ev.dest}];
        if (redundancy_accept(red, ev.frame.seq_no, ev.due, vl.bag) == RxVerdict::Discard) {
            record(ev.due, TraceKind::DiscardedDup, ev.frame, ev.dest);
            return;
        }
        record(ev.due, TraceKind::Delivered, ev.frame, ev.dest, ev.due - ev.frame.emit_time);
    }

    rng::Stream& channel_stream(VlId vl, EsId dst) { return channel_streams_.at({vl, dst}); }

    const Scenario& sc_;
    const TopologySpec& topo_;
    Clock* clock_;

    std::map<VlId, std::size_t> vl_index_of_;
    std::vector<VlState> vls_;
    std::map<std::pair<VlId, EsId>, rng::Stream> channel_streams_;
    std::map<VlId, rng::Stream> tech_streams_;
    std::map<VlId, rng::Stream> proc_streams_;
    std::vector<Ns> channel_busy_until_;
    std::vector<TopologySpec::Attachment> attach_;
    PathMap paths_;
    std::map<std::pair<VlId, EsId>, HopCalibration> calibrations_;
    std::map<std::tuple<VlId, std::size_t, std::size_t>, EsId> branch_dst_;
    std::map<std::pair<VlId, EsId>, RedundancyState> redundancy_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_order_ = 0;
    TraceLog trace_;
};

}  // namespace

std::unique_ptr<Clock> make_steady_clock() { return std::make_unique<SteadyClock>(); }

RunResult run(const Scenario& scenario) {
    if (scenario.pacing != Pacing::Fast)
        throw EngineError("pacing mode mismatch: scenario requests realtime, use run_paced");
    return Engine(scenario, nullptr).run();
}

RunResult run_paced(const Scenario& scenario, Clock& clock) {
    if (scenario.pacing != Pacing::Realtime)
        throw EngineError("pacing mode mismatch: scenario requests fast mode, use run");
    return Engine(scenario, &clock).run();
}

}  // namespace afdx
