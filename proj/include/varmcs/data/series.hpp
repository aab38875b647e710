#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace varmcs::data {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws InputError.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// Closing index levels. Dates strictly increasing, prices positive, at least two points.
struct PriceSeries {
    std::vector<Date> dates;
    std::vector<double> prices;

    void validate() const;
    [[nodiscard]] std::size_t size() const noexcept { return prices.size(); }
};

/// Percentage log-returns; values[k] is dated dates[k].
struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> values;

    void validate() const;
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] std::span<const double> view() const noexcept { return values; }
};

/// y_t = 100 (ln p_t - ln p_{t-1}), dated at t.
ReturnSeries compute_log_returns(const PriceSeries& prices);

/// Consecutive weekdays starting at `first`. Used to date simulated series.
std::vector<Date> business_days(Date first, std::size_t count);

struct SampleSplit {
    ReturnSeries in_sample;
    ReturnSeries out_of_sample;
};

/// The last `out_of_sample_n` observations form the validation set.
SampleSplit split_sample(const ReturnSeries& returns, std::size_t out_of_sample_n);

}  // namespace varmcs::data
