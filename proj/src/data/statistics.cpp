#include "varmcs/data/statistics.hpp"

#include "varmcs/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace varmcs::data {

double empirical_quantile(std::span<const double> values, double level) {
    if (values.empty()) throw InputError("quantile of an empty sample");
    if (!(level >= 0.0 && level <= 1.0)) throw InputError("quantile level must lie in [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summary_statistics(std::span<const double> values, double quantile_level) {
    const std::size_t n = values.size();
    if (n < 8) throw InputError("summary statistics need at least 8 observations");

    SummaryStats s;
    s.n = n;
    s.quantile_level = quantile_level;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    s.min = *mn;
    s.max = *mx;

    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const double nn = static_cast<double>(n);
    s.std_dev = std::sqrt(m2 / (nn - 1.0));
    m2 /= nn;
    m3 /= nn;
    m4 /= nn;

    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2);
        s.jb = jarque_bera(n, s.skewness, s.kurtosis);
    } else {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        s.skewness = nan;
        s.kurtosis = nan;
        s.jb = nan;
        s.degenerate = true;
    }
    s.quantile = empirical_quantile(values, quantile_level);
    return s;
}

}  // namespace varmcs::data
