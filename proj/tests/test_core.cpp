#include <doctest.h>

#include "afdx/core.hpp"
#include "afdx/rng.hpp"

using namespace afdx;

namespace {

VirtualLinkSpec fms_vl1() {
    VirtualLinkSpec vl;
    vl.vl_id = 1;
    vl.source = 1;
    vl.destinations = {3, 4};
    vl.bag = 32 * kMs;
    vl.s_max = ByteSize::from_bytes(75);
    vl.j_max = 47'600;  // derived per-ES bound
    return vl;
}

bool has_violation(const std::vector<std::string>& violations, std::string_view needle) {
    for (const auto& v : violations)
        if (v.find(needle) != std::string::npos) return true;
    return false;
}

// reference for advance_seq: literally apply next_seq k+1 times
std::uint8_t advance_by_iteration(std::uint8_t seq, std::uint64_t skipped) {
    for (std::uint64_t i = 0; i <= skipped; ++i) seq = next_seq(seq);
    return seq;
}

}  // namespace

TEST_CASE("byte sizes parse and print with tenth precision") {
    CHECK(ByteSize::parse("75")->tenths() == 750);
    CHECK(ByteSize::parse("87.5")->tenths() == 875);
    CHECK(ByteSize::parse("87.5")->str() == "87.5");
    CHECK(ByteSize::parse("75")->str() == "75");
    CHECK(ByteSize::parse("87.5")->ceil_bytes() == 88);
    CHECK(ByteSize::parse("75")->ceil_bytes() == 75);
    CHECK(!ByteSize::parse("87.55"));
    CHECK(!ByteSize::parse("-3"));
    CHECK(!ByteSize::parse("abc"));
    CHECK(!ByteSize::parse(""));
}

TEST_CASE("vl validation accepts the FMS rows and reports range breaks") {
    CHECK(validate_vl(fms_vl1()).empty());

    VirtualLinkSpec bad_bag = fms_vl1();
    bad_bag.bag = 3 * kMs;
    CHECK(has_violation(validate_vl(bad_bag), "bag"));

    VirtualLinkSpec big = fms_vl1();
    big.s_max = ByteSize::from_bytes(1600);
    CHECK(has_violation(validate_vl(big), "s_max"));

    VirtualLinkSpec no_dest = fms_vl1();
    no_dest.destinations.clear();
    CHECK(has_violation(validate_vl(no_dest), "destinations"));

    VirtualLinkSpec self = fms_vl1();
    self.destinations.push_back(1);
    CHECK(has_violation(validate_vl(self), "source"));

    VirtualLinkSpec jitter = fms_vl1();
    jitter.j_max = 0;
    CHECK(has_violation(validate_vl(jitter), "j_max"));
    jitter.j_max = 600 * kUs;
    CHECK(has_violation(validate_vl(jitter), "j_max"));
}

TEST_CASE("per-ES jitter bound reproduces the closed-form values") {
    const NetworkConstants consts;

    SUBCASE("single 75-byte VL") {
        const std::vector<VirtualLinkSpec> vls = {fms_vl1()};
        CHECK(max_jitter_for_es_ns(vls, consts) == Ratio::from_int(47'600));
        CHECK(format_ns_as_us(max_jitter_for_es_ns(vls, consts)) == "47.6");
    }
    SUBCASE("empty set keeps the technological floor") {
        CHECK(max_jitter_for_es_ns({}, consts) == Ratio::from_int(40'000));
    }
    SUBCASE("two VLs of 625 and 125 bytes") {
        VirtualLinkSpec a = fms_vl1();
        a.s_max = ByteSize::from_bytes(625);
        VirtualLinkSpec b = fms_vl1();
        b.s_max = ByteSize::from_bytes(125);
        const std::vector<VirtualLinkSpec> vls = {a, b};
        CHECK(max_jitter_for_es_ns(vls, consts) == Ratio::from_int(103'200));
    }
    SUBCASE("80 heavy VLs clamp at the hard limit") {
        std::vector<VirtualLinkSpec> vls;
        for (int i = 0; i < 80; ++i) {
            VirtualLinkSpec vl = fms_vl1();
            vl.s_max = ByteSize::from_bytes(700);
            vls.push_back(vl);
        }
        CHECK(max_jitter_for_es_ns(vls, consts) == Ratio::from_int(500'000));
    }
    SUBCASE("result stays in [40, 500] us and grows with s_max") {
        rng::Stream stream(7);
        for (int round = 0; round < 200; ++round) {
            std::vector<VirtualLinkSpec> vls;
            const std::size_t n = 1 + stream.u64_below(12);
            for (std::size_t i = 0; i < n; ++i) {
                VirtualLinkSpec vl = fms_vl1();
                vl.s_max = ByteSize::from_tenths(640 + stream.uniform_ns(0, 14540));
                vls.push_back(vl);
            }
            const Ratio bound = max_jitter_for_es_ns(vls, consts);
            CHECK(bound.compare(Ratio::from_int(40'000)) >= 0);
            CHECK(bound.compare(Ratio::from_int(500'000)) <= 0);
            const std::size_t bump = stream.u64_below(n);
            const auto old_tenths = vls[bump].s_max.tenths();
            vls[bump].s_max = ByteSize::from_tenths(old_tenths + 1 + stream.u64_below(1000));
            CHECK(max_jitter_for_es_ns(vls, consts).compare(bound) >= 0);
        }
    }
}

TEST_CASE("transmission time follows the wire overhead convention") {
    CHECK(transmission_time_ns(ByteSize::from_bytes(75)) == Ratio::from_int(7'600));
    CHECK(transmission_time_ns(ByteSize::from_bytes(105)) == Ratio::from_int(10'000));
    CHECK(transmission_time_ns(ByteSize::from_bytes(1480)) == Ratio::from_int(120'000));
    CHECK(format_ns_as_us(transmission_time_ns(ByteSize::from_bytes(105))) == "10.0");
}

TEST_CASE("sequence numbers wrap 255 to 1 and never revisit 0") {
    CHECK(next_seq(255) == 1);
    CHECK(next_seq(0) == 1);
    CHECK(next_seq(37) == 38);

    std::uint8_t seq = 1;
    int period = 0;
    do {
        seq = next_seq(seq);
        CHECK(seq != 0);
        ++period;
    } while (seq != 1);
    CHECK(period == 255);
}

TEST_CASE("advance_seq matches repeated application of next_seq") {
    CHECK(advance_seq(10, 0) == 11);
    CHECK(advance_seq(254, 2) == 2);
    CHECK(advance_seq(255, 255) == advance_by_iteration(255, 255));
    CHECK(advance_seq(0, 0) == 1);

    rng::Stream stream(11);
    for (int i = 0; i < 2000; ++i) {
        const auto seq = static_cast<std::uint8_t>(stream.u64_below(256));
        const std::uint64_t skipped = stream.u64_below(1000);
        CHECK(advance_seq(seq, skipped) == advance_by_iteration(seq, skipped));
    }
}

TEST_CASE("destination mac encodes the VL id in the low 16 bits") {
    CHECK(mac_to_string(encode_dest_mac(1)) == "03:00:00:00:00:01");
    CHECK(mac_to_string(encode_dest_mac(0)) == "03:00:00:00:00:00");
    CHECK(mac_to_string(encode_dest_mac(258)) == "03:00:00:00:01:02");
    CHECK(decode_dest_mac(Mac{0x02, 0, 0, 0, 0, 1}) == std::nullopt);
    CHECK(mac_from_string("03:00:00:00:01:02") == encode_dest_mac(258));
    CHECK(!mac_from_string("03:00:00:00:01"));

    rng::Stream stream(13);
    for (int i = 0; i < 2000; ++i) {
        const auto id = static_cast<VlId>(stream.u64_below(65536));
        CHECK(decode_dest_mac(encode_dest_mac(id)) == id);
    }
}

TEST_CASE("random in-range specs always validate clean") {
    static constexpr Ns kBags[] = {1 * kMs,  2 * kMs,  4 * kMs,  8 * kMs,
                                   16 * kMs, 32 * kMs, 64 * kMs, 128 * kMs};
    rng::Stream stream(17);
    for (int i = 0; i < 500; ++i) {
        VirtualLinkSpec vl;
        vl.vl_id = static_cast<VlId>(stream.u64_below(65536));
        vl.source = 1;
        vl.destinations = {2};
        vl.bag = kBags[stream.u64_below(8)];
        vl.s_max = ByteSize::from_tenths(640 + stream.uniform_ns(0, 14540));
        vl.j_max = stream.uniform_ns(1, 500 * kUs);
        CHECK(validate_vl(vl).empty());
    }
}

TEST_CASE("decimal duration parsing is exact at nanosecond precision") {
    CHECK(parse_decimal_ns("32", kMs) == 32 * kMs);
    CHECK(parse_decimal_ns("0.5", kMs) == 500 * kUs);
    CHECK(parse_decimal_ns("47.6", kUs) == 47'600);
    CHECK(parse_decimal_ns("0.032", kSec) == 32 * kMs);
    CHECK(!parse_decimal_ns("1.2.3", kMs));
    CHECK(!parse_decimal_ns("", kMs));
    CHECK(!parse_decimal_ns("0.0000000001", kSec));  // sub-ns
    CHECK(parse_decimal_ns("0.100000000", kSec) == 100 * kMs);
}
