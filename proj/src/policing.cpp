#include "afdx/policing.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace afdx {

BucketParams BucketParams::make(ByteSize s_max, Ns bag, Ns j_max) {
    if (bag <= 0) throw std::invalid_argument("bucket params: bag must be positive");
    if (s_max.tenths() <= 0) throw std::invalid_argument("bucket params: s_max must be positive");
    if (j_max <= 0 || j_max >= bag)
        throw std::invalid_argument("bucket params: j_max must satisfy 0 < j_max < bag");
    return BucketParams(s_max, bag, j_max);
}

BucketParams BucketParams::for_vl(const VirtualLinkSpec& vl) {
    return make(vl.s_max, vl.bag, vl.j_max);
}

std::int64_t BucketParams::credit_scaled(Ns dt) const {
    // the bucket refills from empty within bag + j_max; clamping dt
    // first keeps the product well inside int64
    dt = std::min(dt, bag_ + j_max_);
    return s_max_.tenths() * dt;
}

namespace {
std::int64_t ceil_div(std::int64_t num, std::int64_t den) { return (num + den - 1) / den; }
}  // namespace

std::int64_t BucketParams::rate_bytes_per_s_ceil() const {
    // s_max[B] / bag[s] = tenths * 1e8 / bag_ns
    return ceil_div(s_max_.tenths() * 100'000'000, bag_);
}

std::int64_t BucketParams::burst_bytes_ceil() const {
    // ac_max[B] = tenths * (bag + j_max) / (10 * bag)
    return ceil_div(s_max_.tenths() * (bag_ + j_max_), 10 * bag_);
}

std::string BucketParams::config_json() const {
    nlohmann::ordered_json doc;
    doc["rate_Bps"] = rate_bytes_per_s_ceil();
    doc["burst_B"] = burst_bytes_ceil();
    doc["overhead_B"] = 14;
    doc["conform_exceed"] = "drop";
    return doc.dump();
}

Decision OraclePolicer::on_frame(Ns t) {
    if (t < last_update_) throw std::logic_error("oracle policer: time regression");
    account_scaled_ =
        std::min(account_scaled_ + params_.credit_scaled(t - last_update_), params_.ac_max_scaled());
    last_update_ = t;
    if (account_scaled_ >= params_.threshold_scaled()) {
        account_scaled_ -= params_.threshold_scaled();
        return Decision::Accept;
    }
    return Decision::Reject;
}

std::optional<Ns> AutomatonPolicer::deadline() const {
    if (place_ == Place::S0) return std::nullopt;
    return deadline_;
}

void AutomatonPolicer::catch_up(Ns t) {
    while (place_ != Place::S0 && deadline_ <= t) {
        switch (place_) {
            case Place::S2:
                // account reached s_max: frames are acceptable again
                place_ = Place::S1;
                s1_entry_ = deadline_;
                deadline_ += params_.delta2();
                break;
            case Place::S1:
                // bucket full (t1, which outranks t3)
                place_ = Place::S0;
                break;
            case Place::S3:
                // t3 then t2 in zero time: back to the refill phase
                place_ = Place::S2;
                deadline_ += params_.delta1();
                break;
            case Place::S0:
                break;
        }
    }
}

Decision AutomatonPolicer::on_frame(Ns t) {
    if (t < last_event_) throw std::logic_error("automaton policer: time regression");
    last_event_ = t;
    catch_up(t);  // internal transitions outrank the frame at equal dates
    switch (place_) {
        case Place::S0:
            place_ = Place::S2;
            deadline_ = t + params_.delta1();
            return Decision::Accept;
        case Place::S1:
            // deadline stays s1_entry + delta2: the S3 residence ends
            // where the S1 phase would have
            place_ = Place::S3;
            return Decision::Accept;
        case Place::S2:
        case Place::S3:
            return Decision::Reject;
    }
    return Decision::Reject;  // unreachable
}

EquivalenceResult check_equivalence(const BucketParams& params, std::span<const Ns> arrivals) {
    EquivalenceResult result;
    OraclePolicer oracle(params);
    AutomatonPolicer automaton(params);
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        const Decision expected = oracle.on_frame(arrivals[i]);
        const Decision got = automaton.on_frame(arrivals[i]);
        result.decisions.push_back(expected);
        if (expected != got) {
            result.divergence = Divergence{i, expected, got};
            return result;
        }
    }
    return result;
}

BucketParams random_params(rng::Stream& stream) {
    static constexpr Ns kBagPool[] = {1 * kMs,  2 * kMs,  4 * kMs,  8 * kMs,
                                      16 * kMs, 32 * kMs, 64 * kMs, 128 * kMs};
    const Ns bag = kBagPool[stream.u64_below(8)];
    const ByteSize s_max = ByteSize::from_tenths(640 + stream.uniform_ns(0, 15180 - 640));
    // half the draws stay in the AFDX jitter range, half roam anywhere
    // below the bag to also cover the abstract parameterizations
    const Ns j_hi = stream.u64_below(2) == 0 ? std::min<Ns>(500 * kUs, bag - 1) : bag - 1;
    const Ns j_max = stream.uniform_ns(1, j_hi);
    return BucketParams::make(s_max, bag, j_max);
}

std::vector<Ns> random_arrivals(rng::Stream& stream, const BucketParams& params,
                                std::size_t max_len) {
    const std::size_t len = 1 + stream.u64_below(max_len);
    std::vector<Ns> arrivals;
    arrivals.reserve(len);
    Ns t = stream.uniform_ns(0, params.bag());
    for (std::size_t i = 0; i < len; ++i) {
        arrivals.push_back(t);
        Ns gap = 0;
        switch (stream.u64_below(6)) {
            case 0: gap = params.delta1(); break;           // exact threshold date
            case 1: gap = params.delta2(); break;
            case 2: gap = params.bag(); break;              // nominal period
            case 3: gap = stream.uniform_ns(0, params.delta1()); break;
            case 4: gap = stream.uniform_ns(0, 2 * params.bag()); break;
            default: gap = stream.uniform_ns(0, params.bag() + params.j_max()); break;
        }
        t += std::max<Ns>(gap, 1);  // keep the sequence strictly increasing
    }
    return arrivals;
}

}  // namespace afdx
