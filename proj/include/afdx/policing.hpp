#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "afdx/core.hpp"
#include "afdx/rng.hpp"

namespace afdx {

enum class Decision { Accept, Reject };

/// Frame-based token-bucket parameters for one VL.
///
/// The account is credited at s_max/bag bytes per unit time and capped
/// at ac_max = s_max * (1 + j_max/bag). The two automaton constants are
/// delta1 = bag - j_max (time from one accept until the account covers
/// the next frame) and delta2 = j_max (time from the acceptance
/// threshold up to a full bucket).
///
/// Internally the account is stored scaled by bag_ns in tenth-bytes, so
/// crediting rate * dt, the threshold compare and the cap are all exact
/// integer operations.
class BucketParams {
  public:
    /// Requires 0 < j_max < bag (the 4-state model is unsound otherwise).
    static BucketParams make(ByteSize s_max, Ns bag, Ns j_max);
    static BucketParams for_vl(const VirtualLinkSpec& vl);

    ByteSize s_max() const { return s_max_; }
    Ns bag() const { return bag_; }
    Ns j_max() const { return j_max_; }
    Ns delta1() const { return bag_ - j_max_; }
    Ns delta2() const { return j_max_; }

    // account scale: tenth-bytes * bag_ns
    std::int64_t threshold_scaled() const { return s_max_.tenths() * bag_; }
    std::int64_t ac_max_scaled() const { return s_max_.tenths() * (bag_ + j_max_); }
    std::int64_t credit_scaled(Ns dt) const;

    /// ceil(s_max / bag) in bytes per second, as exported to policer
    /// configuration ("rate").
    std::int64_t rate_bytes_per_s_ceil() const;
    /// ceil(ac_max) in bytes, as exported to policer configuration
    /// ("burst").
    std::int64_t burst_bytes_ceil() const;

    /// Policer config record: {"rate_Bps", "burst_B", "overhead_B": 14,
    /// "conform_exceed": "drop"} as a JSON document.
    std::string config_json() const;

  private:
    BucketParams(ByteSize s_max, Ns bag, Ns j_max) : s_max_(s_max), bag_(bag), j_max_(j_max) {}
    ByteSize s_max_;
    Ns bag_ = 0;
    Ns j_max_ = 0;
};

/// Reference policer: the continuous byte account, credited lazily on
/// each arrival. Accepts when the account covers s_max (equality
/// accepts) and then debits s_max regardless of the actual frame size.
class OraclePolicer {
  public:
    explicit OraclePolicer(const BucketParams& params)
        : params_(params), account_scaled_(params.ac_max_scaled()) {}

    Decision on_frame(Ns t);  // throws on time regression

    std::int64_t account_scaled() const { return account_scaled_; }
    Ns last_update() const { return last_update_; }

  private:
    BucketParams params_;
    std::int64_t account_scaled_;
    Ns last_update_ = 0;
};

enum class Place : std::uint8_t { S0, S1, S2, S3 };

/// The 4-state timed-automaton policer derived from the Petri-net
/// model. S0 = full bucket, S1 = next frame accepted, S2/S3 = transient
/// rejecting states. Internal transitions due at or before an arrival
/// fire before the frame is classified.
class AutomatonPolicer {
  public:
    explicit AutomatonPolicer(const BucketParams& params) : params_(params) {}

    Decision on_frame(Ns t);  // throws on time regression

    Place place() const { return place_; }
    /// Next scheduled internal transition; empty in S0.
    std::optional<Ns> deadline() const;
    Ns s1_entry() const { return s1_entry_; }

  private:
    void catch_up(Ns t);

    BucketParams params_;
    Place place_ = Place::S0;
    Ns deadline_ = 0;  // valid unless place_ == S0
    Ns s1_entry_ = 0;  // valid in S1/S3
    Ns last_event_ = 0;
};

struct Divergence {
    std::size_t index;
    Decision oracle;
    Decision automaton;
};

struct EquivalenceResult {
    std::vector<Decision> decisions;      // the (agreed) oracle decisions
    std::optional<Divergence> divergence; // empty means match
    bool match() const { return !divergence.has_value(); }
};

/// Runs both policers from the full-bucket initial state over a
/// strictly increasing arrival sequence and reports the first index
/// where their decisions differ.
EquivalenceResult check_equivalence(const BucketParams& params, std::span<const Ns> arrivals);

/// Random legal parameters for the equivalence harness: AFDX bags,
/// s_max in [64, 1518] tenths-exact, 0 < j_max < bag.
BucketParams random_params(rng::Stream& stream);

/// Strictly increasing arrival times mixing boundary-exact gaps
/// (delta1, delta2, bag, ...) with random ones, so threshold-equality
/// behavior is actually exercised.
std::vector<Ns> random_arrivals(rng::Stream& stream, const BucketParams& params,
                                std::size_t max_len = 48);

}  // namespace afdx
