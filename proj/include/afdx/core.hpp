#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace afdx {

// All timestamps and durations are integer nanoseconds.
using Ns = std::int64_t;

inline constexpr Ns kUs = 1'000;
inline constexpr Ns kMs = 1'000'000;
inline constexpr Ns kSec = 1'000'000'000;

using EsId = std::uint32_t;
using VlId = std::uint16_t;
using PortId = std::uint32_t;

/// Exact fraction over int64, for formula results that must not round
/// (jitter bounds, transmission times). Always normalized, den > 0.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Ratio make(std::int64_t num, std::int64_t den);
    static Ratio from_int(std::int64_t v) { return Ratio{v, 1}; }

    Ratio add(const Ratio& o) const;
    int compare(const Ratio& o) const;  // -1, 0, +1
    bool operator==(const Ratio& o) const = default;

    std::int64_t floor_i64() const;
    std::int64_t ceil_i64() const;
    std::int64_t round_i64() const;  // half away from zero
    bool is_integer() const { return den == 1; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Renders a duration held in nanoseconds as microseconds with one
/// decimal place, e.g. 47600 ns -> "47.6".
std::string format_ns_as_us(const Ratio& ns);
std::string format_ns_as_us(Ns ns);

/// Frame size in bytes with one decimal digit of precision (the VL
/// tables use sizes like 87.5). Stored as tenths of a byte so rate
/// computations stay exact.
class ByteSize {
  public:
    ByteSize() = default;
    static ByteSize from_tenths(std::int64_t tenths) { return ByteSize(tenths); }
    static ByteSize from_bytes(std::int64_t bytes) { return ByteSize(bytes * 10); }
    /// Parses "75" or "87.5". Rejects more than one decimal digit.
    static std::optional<ByteSize> parse(std::string_view text);

    std::int64_t tenths() const { return tenths_; }
    std::int64_t ceil_bytes() const { return (tenths_ + 9) / 10; }
    double as_double() const { return static_cast<double>(tenths_) / 10.0; }
    /// "75" or "87.5" (no trailing ".0" on whole bytes).
    std::string str() const;

    auto operator<=>(const ByteSize&) const = default;

  private:
    explicit ByteSize(std::int64_t tenths) : tenths_(tenths) {}
    std::int64_t tenths_ = 0;
};

using Mac = std::array<std::uint8_t, 6>;

struct NetworkConstants {
    std::int64_t nbw_bits_per_us = 100;        // 100 Mbps
    std::int64_t wire_overhead_bytes = 20;
    Ns tech_jitter_floor = 40 * kUs;
    Ns jitter_hard_limit = 500 * kUs;
};

/// One virtual link's contract.
struct VirtualLinkSpec {
    VlId vl_id = 0;
    EsId source = 0;
    std::vector<EsId> destinations;
    Ns bag = 0;          // emission period
    ByteSize s_max;      // maximum frame size
    Ns j_max = 0;        // maximum emission jitter
};

/// Sequence-numbered unit of transfer. The emission timestamp rides in
/// the payload so receivers can compute latency.
struct Frame {
    VlId vl_id = 0;
    std::uint8_t seq_no = 0;
    Ns emit_time = 0;
    std::int64_t size_bytes = 0;
    std::int64_t payload_len = 17;
};

bool is_legal_bag(Ns bag);

/// Returns every violated VL invariant; empty means the VL is valid.
std::vector<std::string> validate_vl(const VirtualLinkSpec& vl,
                                     const NetworkConstants& consts = {});

/// Wire time of one frame in ns: (overhead + size) * 8 / bandwidth.
Ratio transmission_time_ns(ByteSize size, const NetworkConstants& consts = {});

/// Per-ES jitter bound in ns: min(hard limit, floor + sum of frame
/// transmission times over the VLs hosted by that ES). This is the
/// default j_max for those VLs.
Ratio max_jitter_for_es_ns(std::span<const VirtualLinkSpec> vls,
                           const NetworkConstants& consts = {});

/// max_jitter_for_es_ns rounded to whole nanoseconds (exact for the
/// default 100 bits/us bandwidth).
Ns derived_j_max_ns(std::span<const VirtualLinkSpec> vls,
                    const NetworkConstants& consts = {});

/// Next frame sequence number: 1..255 cycle, 255 wraps to 1.
/// 0 only ever appears as the reset value, never as a successor.
std::uint8_t next_seq(std::uint8_t seq);

/// Sequence number after skipping `skipped` emission periods, i.e.
/// next_seq applied skipped+1 times.
std::uint8_t advance_seq(std::uint8_t seq, std::uint64_t skipped);

/// Multicast destination address 03:00:00:00:hh:ll with the VL id in
/// the low 16 bits, big-endian.
Mac encode_dest_mac(VlId vl_id);

/// Inverse of encode_dest_mac; empty if the constant prefix is wrong.
std::optional<VlId> decode_dest_mac(const Mac& mac);

std::string mac_to_string(const Mac& mac);
std::optional<Mac> mac_from_string(std::string_view text);

/// Parses a non-negative decimal like "32", "0.5" or "47.6" into an
/// integer count of `unit_ns`. Fails if the value needs sub-ns
/// precision or does not parse.
std::optional<Ns> parse_decimal_ns(std::string_view text, Ns unit_ns);

}  // namespace afdx
