#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "afdx/core.hpp"

namespace afdx {

/// Empirical CDF over an integer-ns sample set. F(x) is the fraction
/// of samples <= x; a step function with F(max) = 1.
class Ecdf {
  public:
    /// Throws std::invalid_argument on an empty sample set.
    static Ecdf build(std::span<const Ns> samples);

    std::size_t sample_count() const { return n_; }
    Ns min() const { return values_.front(); }
    Ns max() const { return values_.back(); }

    double fraction_at(Ns x) const;  // F(x)

    /// Smallest sample value x with F(x) >= p/100, for p in (0, 100].
    Ns percentile(double p) const;

    /// Distinct sample values with their cumulative counts.
    const std::vector<Ns>& values() const { return values_; }
    const std::vector<std::size_t>& cumulative() const { return cum_; }

    /// Two-column CSV `value_ns,cum_fraction`, one row per distinct value.
    void write_csv(std::ostream& out) const;

  private:
    std::vector<Ns> values_;
    std::vector<std::size_t> cum_;
    std::size_t n_ = 0;
};

struct SeriesStats {
    Ns min = 0;
    Ns max = 0;
    double mean = 0.0;
    Ns p50 = 0;
    Ns p95 = 0;
    Ns p99 = 0;
    std::int64_t outliers = 0;  // samples strictly above p99
};

SeriesStats series_stats(std::span<const Ns> samples);

}  // namespace afdx
