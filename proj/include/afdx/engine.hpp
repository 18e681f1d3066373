#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "afdx/models.hpp"
#include "afdx/trace.hpp"

namespace afdx {

enum class ModelLevel : std::uint8_t { TimedChannel, DirectVl, SwitchedVl };
enum class Pacing : std::uint8_t { Fast, Realtime };

std::string_view model_level_name(ModelLevel level);
std::optional<ModelLevel> model_level_from(std::string_view name);

/// One reproducible simulation run. The trace is a pure function of
/// (scenario, seed); pacing only affects wall-clock dispatch.
struct Scenario {
    TopologySpec topology;
    ModelLevel model = ModelLevel::TimedChannel;
    Ns duration = 60 * kSec;       // virtual time
    std::int64_t speed_num = 1;    // emission speed factor as a fraction;
    std::int64_t speed_den = 1;    // 2/1 sends frames twice as fast
    std::uint64_t seed = 0;
    Pacing pacing = Pacing::Fast;
};

/// Wall-vs-virtual drift summary of a realtime run.
struct PacingReport {
    std::size_t events = 0;
    Ns max_drift = 0;
    Ns mean_drift = 0;
    Ns elapsed = 0;          // wall time of the whole run
    Ns drift_bound = 10 * kMs;
    bool bound_exceeded = false;
    double mean_drift_ratio() const {
        return elapsed > 0 ? static_cast<double>(mean_drift) / static_cast<double>(elapsed) : 0.0;
    }
};

struct RunResult {
    TraceLog trace;
    std::optional<PacingReport> pacing;
};

/// Monotonic clock used by paced runs; injected so tests can fake it.
class Clock {
  public:
    virtual ~Clock() = default;
    virtual Ns now() = 0;               // ns since an epoch of the clock's choosing
    virtual void sleep_until(Ns t) = 0;
};

/// std::chrono::steady_clock, epoch = construction time.
std::unique_ptr<Clock> make_steady_clock();

/// Scenario/topology problems found before the run starts (missing
/// channel bounds for the model, unroutable fabric, bad speed, ...).
class EngineError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Model faults hit during the run (channel occupancy violation,
/// clock regression).
class EngineFault : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Fast mode: dispatches the whole event queue as quickly as possible.
RunResult run(const Scenario& scenario);

/// Realtime mode: each event waits for the wall clock to reach its
/// virtual due time (1:1 ratio). Requires scenario.pacing == Realtime.
RunResult run_paced(const Scenario& scenario, Clock& clock);

}  // namespace afdx
