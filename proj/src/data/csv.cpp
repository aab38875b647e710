#include "varmcs/data/csv.hpp"

#include "varmcs/common/csv.hpp"
#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

namespace varmcs::data {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header, const std::string& name) {
    const auto wanted = lower(name);
    for (std::size_t k = 0; k < header.size(); ++k)
        if (lower(header[k]) == wanted) return k;
    return std::nullopt;
}

}  // namespace

LoadedSeries read_series_csv(std::istream& in, const CsvColumns& columns) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw InputError("series CSV is empty");

    const auto date_col = find_column(header, columns.date);
    if (!date_col) throw InputError("series CSV has no '" + columns.date + "' column");

    LoadedSeries loaded;
    std::optional<std::size_t> value_col;
    if (columns.value.empty()) {
        if ((value_col = find_column(header, "price"))) {
            loaded.kind = SeriesKind::Price;
        } else if ((value_col = find_column(header, "return"))) {
            loaded.kind = SeriesKind::Return;
        } else {
            throw InputError("series CSV needs a 'price' or 'return' column");
        }
    } else {
        value_col = find_column(header, columns.value);
        if (!value_col) throw InputError("series CSV has no '" + columns.value + "' column");
        loaded.kind = lower(columns.value).find("return") != std::string::npos ? SeriesKind::Return
                                                                                : SeriesKind::Price;
    }

    std::vector<Date> dates;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        const auto where = " on line " + std::to_string(line_no);
        if (fields.size() <= std::max(*date_col, *value_col))
            throw InputError("missing fields" + where);
        try {
            dates.push_back(parse_date(fields[*date_col]));
        } catch (const InputError& e) {
            throw InputError(e.what() + where);
        }
        const auto value = parse_double(fields[*value_col]);
        if (!value || !std::isfinite(*value))
            throw InputError("malformed number '" + fields[*value_col] + "'" + where);
        values.push_back(*value);
    }

    if (loaded.kind == SeriesKind::Price) {
        loaded.prices.dates = std::move(dates);
        loaded.prices.prices = std::move(values);
        loaded.returns = compute_log_returns(loaded.prices);
    } else {
        loaded.returns.dates = std::move(dates);
        loaded.returns.values = std::move(values);
        loaded.returns.validate();
    }
    return loaded;
}

LoadedSeries read_series_csv(const std::filesystem::path& path, const CsvColumns& columns) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_series_csv(in, columns);
}

void write_prices_csv(std::ostream& out, const PriceSeries& prices) {
    out << "date,price\n";
    for (std::size_t t = 0; t < prices.size(); ++t)
        out << format_date(prices.dates[t]) << ',' << format_double(prices.prices[t]) << '\n';
}

void write_returns_csv(std::ostream& out, const ReturnSeries& returns) {
    out << "date,return\n";
    for (std::size_t t = 0; t < returns.size(); ++t)
        out << format_date(returns.dates[t]) << ',' << format_double(returns.values[t]) << '\n';
}

}  // namespace varmcs::data
