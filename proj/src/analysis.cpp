#include "afdx/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace afdx {

Ecdf Ecdf::build(std::span<const Ns> samples) {
    if (samples.empty()) throw std::invalid_argument("ecdf: empty sample set");
    std::vector<Ns> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    Ecdf e;
    e.n_ = sorted.size();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!e.values_.empty() && e.values_.back() == sorted[i]) {
            ++e.cum_.back();
        } else {
            e.values_.push_back(sorted[i]);
            e.cum_.push_back(i + 1);
        }
    }
    return e;
}

double Ecdf::fraction_at(Ns x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return static_cast<double>(cum_[it - values_.begin() - 1]) / static_cast<double>(n_);
}

Ns Ecdf::percentile(double p) const {
    if (!(p > 0.0) || p > 100.0) throw std::invalid_argument("percentile: p outside (0, 100]");
    // smallest rank i with i/n >= p/100, i.e. i = ceil(n*p/100)
    const double threshold = static_cast<double>(n_) * p;
    auto rank = static_cast<std::size_t>(std::ceil(threshold / 100.0));
    while (rank > 1 && static_cast<double>(rank - 1) * 100.0 >= threshold) --rank;
    while (static_cast<double>(rank) * 100.0 < threshold) ++rank;
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), rank);
    return values_[it - cum_.begin()];
}

void Ecdf::write_csv(std::ostream& out) const {
    out << "value_ns,cum_fraction\n";
    char buf[64];
    for (std::size_t i = 0; i < values_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g",
                      static_cast<double>(cum_[i]) / static_cast<double>(n_));
        out << values_[i] << ',' << buf << '\n';
    }
}

SeriesStats series_stats(std::span<const Ns> samples) {
    const Ecdf e = Ecdf::build(samples);
    SeriesStats stats;
    stats.min = e.min();
    stats.max = e.max();
    __int128 sum = 0;
    for (Ns v : samples) sum += v;
    stats.mean = static_cast<double>(sum) / static_cast<double>(samples.size());
    stats.p50 = e.percentile(50);
    stats.p95 = e.percentile(95);
    stats.p99 = e.percentile(99);
    for (Ns v : samples)
        if (v > stats.p99) ++stats.outliers;
    return stats;
}

}  // namespace afdx
