#pragma once

#include <cstddef>
#include <span>

namespace varmcs::data {

/// Descriptive statistics in the layout of a summary table.
///
/// Moments use the n denominator except `std_dev`, which uses n-1.
/// `kurtosis` is the raw standardized fourth moment (3 for a Gaussian).
/// `quantile` is the empirical quantile at `quantile_level`.
/// `jb` is the Jarque-Bera statistic n (S^2/6 + (K-3)^2/24).
/// For a constant series skewness, kurtosis and jb are NaN and `degenerate` is set.
struct SummaryStats {
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double quantile_level = 0.05;
    double quantile = 0.0;
    double jb = 0.0;
    bool degenerate = false;
};

/// Requires at least 8 observations.
SummaryStats summary_statistics(std::span<const double> values, double quantile_level = 0.05);

/// Linear interpolation between order statistics: h = (n-1) level.
double empirical_quantile(std::span<const double> values, double level);

/// Jarque-Bera statistic from sample size, skewness and raw kurtosis.
inline double jarque_bera(std::size_t n, double skewness, double kurtosis) {
    const double excess = kurtosis - 3.0;
    return static_cast<double>(n) * (skewness * skewness / 6.0 + excess * excess / 24.0);
}

}  // namespace varmcs::data
