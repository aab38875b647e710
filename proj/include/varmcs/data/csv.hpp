#pragma once

#include "varmcs/data/series.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace varmcs::data {

enum class SeriesKind { Price, Return };

/// Column mapping for series CSV files. An empty `value` column means
/// "use `price` if present, otherwise `return`".
struct CsvColumns {
    std::string date = "date";
    std::string value;
};

struct LoadedSeries {
    SeriesKind kind = SeriesKind::Price;
    PriceSeries prices;    // only filled for price files
    ReturnSeries returns;  // always filled; converted from prices when needed
};

/// Reads a header row then one observation per row. Malformed rows are rejected
/// with their 1-based line number. Numbers are parsed locale-independently.
LoadedSeries read_series_csv(std::istream& in, const CsvColumns& columns = {});
LoadedSeries read_series_csv(const std::filesystem::path& path, const CsvColumns& columns = {});

void write_prices_csv(std::ostream& out, const PriceSeries& prices);
void write_returns_csv(std::ostream& out, const ReturnSeries& returns);

}  // namespace varmcs::data
