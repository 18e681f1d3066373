#include "afdx/core.hpp"

#include <charconv>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace afdx {

Ratio Ratio::make(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("Ratio: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Ratio{num, den};
}

Ratio Ratio::add(const Ratio& o) const {
    const std::int64_t g = std::gcd(den, o.den);
    const std::int64_t l = den / g * o.den;  // lcm
    return make(num * (l / den) + o.num * (l / o.den), l);
}

int Ratio::compare(const Ratio& o) const {
    const __int128 lhs = static_cast<__int128>(num) * o.den;
    const __int128 rhs = static_cast<__int128>(o.num) * den;
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
}

std::int64_t Ratio::floor_i64() const {
    std::int64_t q = num / den;
    if (num % den != 0 && num < 0) --q;
    return q;
}

std::int64_t Ratio::ceil_i64() const {
    std::int64_t q = num / den;
    if (num % den != 0 && num > 0) ++q;
    return q;
}

std::int64_t Ratio::round_i64() const {
    const std::int64_t q = num / den;
    const std::int64_t r = num % den;
    if (r == 0) return q;
    if (2 * (r < 0 ? -r : r) >= den) return q + (num > 0 ? 1 : -1);
    return q;
}

std::string format_ns_as_us(const Ratio& ns) {
    // value in tenths of a microsecond, rounded half away from zero
    const std::int64_t tenths = Ratio::make(ns.num, ns.den * 100).round_i64();
    char buf[48];
    std::snprintf(buf, sizeof buf, "%lld.%lld", static_cast<long long>(tenths / 10),
                  static_cast<long long>(tenths % 10 < 0 ? -(tenths % 10) : tenths % 10));
    return buf;
}

std::string format_ns_as_us(Ns ns) { return format_ns_as_us(Ratio::from_int(ns)); }

std::optional<ByteSize> ByteSize::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::int64_t whole = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [p, ec] = std::from_chars(begin, end, whole);
    if (ec != std::errc{} || whole < 0) return std::nullopt;
    std::int64_t tenths = whole * 10;
    if (p != end) {
        if (*p != '.' || end - p != 2 || p[1] < '0' || p[1] > '9') return std::nullopt;
        tenths += p[1] - '0';
    }
    return ByteSize::from_tenths(tenths);
}

std::string ByteSize::str() const {
    char buf[32];
    if (tenths_ % 10 == 0)
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(tenths_ / 10));
    else
        std::snprintf(buf, sizeof buf, "%lld.%lld", static_cast<long long>(tenths_ / 10),
                      static_cast<long long>(tenths_ % 10));
    return buf;
}

bool is_legal_bag(Ns bag) {
    for (int n = 0; n <= 7; ++n)
        if (bag == (Ns{1} << n) * kMs) return true;
    return false;
}

std::vector<std::string> validate_vl(const VirtualLinkSpec& vl, const NetworkConstants& consts) {
    std::vector<std::string> violations;
    if (!is_legal_bag(vl.bag)) violations.push_back("bag not a power-of-two ms in 1..128");
    if (vl.s_max < ByteSize::from_bytes(64) || vl.s_max > ByteSize::from_bytes(1518))
        violations.push_back("s_max out of [64,1518] bytes");
    if (vl.destinations.empty()) violations.push_back("destinations empty");
    for (EsId dst : vl.destinations)
        if (dst == vl.source) {
            violations.push_back("source appears in destinations");
            break;
        }
    if (vl.j_max <= 0 || vl.j_max > consts.jitter_hard_limit)
        violations.push_back("j_max out of (0, " + format_ns_as_us(consts.jitter_hard_limit) +
                             "us]");
    if (vl.j_max >= vl.bag) violations.push_back("j_max not smaller than bag");
    return violations;
}

Ratio transmission_time_ns(ByteSize size, const NetworkConstants& consts) {
    // bits = (overhead + size) * 8; ns = bits * 1000 / (bits/us)
    const std::int64_t tenth_bytes = consts.wire_overhead_bytes * 10 + size.tenths();
    return Ratio::make(tenth_bytes * 800, consts.nbw_bits_per_us);
}

Ratio max_jitter_for_es_ns(std::span<const VirtualLinkSpec> vls, const NetworkConstants& consts) {
    Ratio total = Ratio::from_int(consts.tech_jitter_floor);
    for (const VirtualLinkSpec& vl : vls) total = total.add(transmission_time_ns(vl.s_max, consts));
    const Ratio limit = Ratio::from_int(consts.jitter_hard_limit);
    return total.compare(limit) > 0 ? limit : total;
}

Ns derived_j_max_ns(std::span<const VirtualLinkSpec> vls, const NetworkConstants& consts) {
    return max_jitter_for_es_ns(vls, consts).round_i64();
}

std::uint8_t next_seq(std::uint8_t seq) { return seq == 255 ? std::uint8_t{1} : ++seq; }

std::uint8_t advance_seq(std::uint8_t seq, std::uint64_t skipped) {
    // position in the 1..255 cycle; the reset value 0 sits just before 1
    const std::int64_t pos = seq == 0 ? -1 : seq - 1;
    const std::int64_t steps = static_cast<std::int64_t>(skipped % 255) + 1;
    return static_cast<std::uint8_t>((pos + steps) % 255 + 1);
}

Mac encode_dest_mac(VlId vl_id) {
    return Mac{0x03, 0x00, 0x00, 0x00, static_cast<std::uint8_t>(vl_id >> 8),
               static_cast<std::uint8_t>(vl_id & 0xff)};
}

std::optional<VlId> decode_dest_mac(const Mac& mac) {
    if (mac[0] != 0x03 || mac[1] != 0x00 || mac[2] != 0x00 || mac[3] != 0x00) return std::nullopt;
    return static_cast<VlId>((mac[4] << 8) | mac[5]);
}

std::string mac_to_string(const Mac& mac) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3],
                  mac[4], mac[5]);
    return buf;
}

std::optional<Mac> mac_from_string(std::string_view text) {
    if (text.size() != 17) return std::nullopt;
    Mac mac{};
    for (std::size_t i = 0; i < 6; ++i) {
        const char* p = text.data() + i * 3;
        if (i > 0 && p[-1] != ':') return std::nullopt;
        unsigned byte = 0;
        auto [q, ec] = std::from_chars(p, p + 2, byte, 16);
        if (ec != std::errc{} || q != p + 2) return std::nullopt;
        mac[i] = static_cast<std::uint8_t>(byte);
    }
    return mac;
}

std::optional<Ns> parse_decimal_ns(std::string_view text, Ns unit_ns) {
    if (text.empty()) return std::nullopt;
    std::int64_t whole = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [p, ec] = std::from_chars(begin, end, whole);
    if (ec != std::errc{} || whole < 0) return std::nullopt;
    __int128 total = static_cast<__int128>(whole) * unit_ns;
    if (p != end) {
        if (*p != '.') return std::nullopt;
        ++p;
        if (p == end) return std::nullopt;
        Ns scale = unit_ns;
        for (; p != end; ++p) {
            if (*p < '0' || *p > '9') return std::nullopt;
            if (scale % 10 != 0) {
                if (*p != '0') return std::nullopt;  // sub-ns precision
                continue;
            }
            scale /= 10;
            total += static_cast<__int128>(*p - '0') * scale;
        }
    }
    if (total > INT64_MAX) return std::nullopt;
    return static_cast<Ns>(total);
}

}  // namespace afdx
