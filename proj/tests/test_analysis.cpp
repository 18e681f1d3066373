#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "afdx/analysis.hpp"
#include "afdx/rng.hpp"

using namespace afdx;

TEST_CASE("ecdf counts duplicates and steps at sample values") {
    const std::vector<Ns> samples = {1, 2, 2, 4};
    const Ecdf e = Ecdf::build(samples);
    CHECK(e.sample_count() == 4);
    CHECK(e.fraction_at(2) == doctest::Approx(0.75));
    CHECK(e.fraction_at(3) == doctest::Approx(0.75));
    CHECK(e.fraction_at(4) == doctest::Approx(1.0));
    CHECK(e.fraction_at(0) == doctest::Approx(0.0));
    CHECK(e.min() == 1);
    CHECK(e.max() == 4);

    const Ecdf single = Ecdf::build(std::vector<Ns>{10});
    CHECK(single.fraction_at(10) == doctest::Approx(1.0));
    CHECK(single.fraction_at(9) == doctest::Approx(0.0));

    CHECK_THROWS_AS(Ecdf::build({}), std::invalid_argument);
}

TEST_CASE("percentile is the left-continuous inverse") {
    const Ecdf e = Ecdf::build(std::vector<Ns>{1, 2, 2, 4});
    CHECK(e.percentile(50) == 2);
    CHECK(e.percentile(100) == 4);
    CHECK(e.percentile(25) == 1);
    CHECK(e.percentile(25.001) == 2);
    CHECK(e.percentile(0.001) == 1);

    const Ecdf single = Ecdf::build(std::vector<Ns>{10});
    CHECK(single.percentile(1) == 10);
    CHECK(single.percentile(50) == 10);
    CHECK(single.percentile(100) == 10);

    CHECK_THROWS_AS(e.percentile(0), std::invalid_argument);
    CHECK_THROWS_AS(e.percentile(101), std::invalid_argument);
}

TEST_CASE("series statistics on the uniform ladder") {
    std::vector<Ns> ladder;
    for (Ns v = 1; v <= 100; ++v) ladder.push_back(v);
    const SeriesStats stats = series_stats(ladder);
    CHECK(stats.min == 1);
    CHECK(stats.max == 100);
    CHECK(stats.mean == doctest::Approx(50.5));
    CHECK(stats.p50 == 50);
    CHECK(stats.p95 == 95);
    CHECK(stats.p99 == 99);
    CHECK(stats.outliers == 1);  // only the value 100 sits above p99

    const std::vector<Ns> constant = {7, 7, 7, 7};
    const SeriesStats flat = series_stats(constant);
    CHECK(flat.min == 7);
    CHECK(flat.max == 7);
    CHECK(flat.mean == doctest::Approx(7.0));
    CHECK(flat.p50 == 7);
    CHECK(flat.outliers == 0);
}

TEST_CASE("ecdf properties over random sample sets") {
    rng::Stream stream(2024);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 1 + stream.u64_below(200);
        std::vector<Ns> samples;
        for (std::size_t i = 0; i < n; ++i) samples.push_back(stream.uniform_ns(0, 1'000'000));

        const Ecdf e = Ecdf::build(samples);
        CHECK(e.fraction_at(e.max()) == doctest::Approx(1.0));
        CHECK(e.fraction_at(e.min() - 1) == doctest::Approx(0.0));

        // permutation invariance
        std::vector<Ns> shuffled = samples;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[stream.u64_below(i)]);
        const Ecdf e2 = Ecdf::build(shuffled);
        CHECK(e.values() == e2.values());
        CHECK(e.cumulative() == e2.cumulative());

        // percentile monotone in p, pinned at the max
        Ns last = e.min();
        for (double p : {5.0, 25.0, 50.0, 75.0, 95.0, 100.0}) {
            const Ns v = e.percentile(p);
            CHECK(v >= last);
            last = v;
        }
        CHECK(e.percentile(100) == e.max());

        // scaling all samples scales every percentile
        const Ns c = 1 + static_cast<Ns>(stream.u64_below(1000));
        std::vector<Ns> scaled;
        for (Ns v : samples) scaled.push_back(v * c);
        const Ecdf es = Ecdf::build(scaled);
        for (double p : {10.0, 50.0, 90.0, 100.0})
            CHECK(es.percentile(p) == e.percentile(p) * c);
    }
}

TEST_CASE("cdf csv lists one row per distinct value") {
    const Ecdf e = Ecdf::build(std::vector<Ns>{5, 1, 5, 9});
    std::ostringstream out;
    e.write_csv(out);
    CHECK(out.str() == "value_ns,cum_fraction\n1,0.25\n5,0.75\n9,1\n");
}
