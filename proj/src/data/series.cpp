#include "varmcs/data/series.hpp"

#include "varmcs/common/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace varmcs::data {

namespace {

template <typename Int>
Int parse_int(std::string_view text, std::string_view whole) {
    Int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InputError("invalid date '" + std::string(whole) + "'");
    return value;
}

void check_dates(const std::vector<Date>& dates, std::size_t expected, const char* what) {
    if (dates.size() != expected)
        throw InputError(std::string(what) + ": dates and values differ in length");
    for (std::size_t k = 1; k < dates.size(); ++k) {
        if (!(dates[k - 1] < dates[k]))
            throw InputError(std::string(what) + ": dates not strictly increasing at index " +
                             std::to_string(k));
    }
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw InputError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    const int y = parse_int<int>(text.substr(0, 4), text);
    const unsigned m = parse_int<unsigned>(text.substr(5, 2), text);
    const unsigned d = parse_int<unsigned>(text.substr(8, 2), text);
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
    return date;
}

std::string format_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

void PriceSeries::validate() const {
    if (prices.size() < 2) throw InputError("price series needs at least 2 observations");
    check_dates(dates, prices.size(), "price series");
    for (std::size_t k = 0; k < prices.size(); ++k) {
        if (!(prices[k] > 0.0) || !std::isfinite(prices[k]))
            throw InputError("non-positive price at index " + std::to_string(k));
    }
}

void ReturnSeries::validate() const {
    check_dates(dates, values.size(), "return series");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k]))
            throw InputError("non-finite return at index " + std::to_string(k));
    }
}

ReturnSeries compute_log_returns(const PriceSeries& prices) {
    prices.validate();
    ReturnSeries out;
    out.values.reserve(prices.size() - 1);
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    for (std::size_t t = 1; t < prices.size(); ++t)
        out.values.push_back((std::log(prices.prices[t]) - std::log(prices.prices[t - 1])) * 100.0);
    return out;
}

std::vector<Date> business_days(Date first, std::size_t count) {
    using namespace std::chrono;
    std::vector<Date> out;
    out.reserve(count);
    sys_days day{first};
    while (out.size() < count) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) out.emplace_back(day);
        day += days{1};
    }
    return out;
}

SampleSplit split_sample(const ReturnSeries& returns, std::size_t out_of_sample_n) {
    const std::size_t n = returns.size();
    if (out_of_sample_n == 0 || out_of_sample_n >= n)
        throw InputError("out-of-sample size " + std::to_string(out_of_sample_n) +
                         " must lie strictly between 0 and the series length " + std::to_string(n));
    const std::size_t cut = n - out_of_sample_n;
    const bool dated = !returns.dates.empty();
    SampleSplit split;
    split.in_sample.values.assign(returns.values.begin(), returns.values.begin() + cut);
    split.out_of_sample.values.assign(returns.values.begin() + cut, returns.values.end());
    if (dated) {
        split.in_sample.dates.assign(returns.dates.begin(), returns.dates.begin() + cut);
        split.out_of_sample.dates.assign(returns.dates.begin() + cut, returns.dates.end());
    }
    return split;
}

}  // namespace varmcs::data
