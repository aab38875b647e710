#include "varmcs/risk/backtest.hpp"

#include "varmcs/common/csv.hpp"
#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace varmcs::risk {

BacktestReport backtest(std::span<const double> realized, std::span<const double> var, double tau) {
    if (realized.size() != var.size()) throw InputError("backtest: realized and VaR series differ in length");
    if (realized.empty()) throw InputError("backtest: empty series");
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("backtest: tau must lie in (0,1)");
    BacktestReport r;
    r.n = realized.size();
    r.tau = tau;
    double sum = 0.0;
    for (std::size_t t = 0; t < realized.size(); ++t) {
        if (realized[t] < var[t]) {
            ++r.violations;
            const double dev = std::abs(realized[t] - var[t]);
            sum += dev;
            r.ADmax = std::max(r.ADmax, dev);
        }
    }
    r.AE = static_cast<double>(r.violations) / (tau * static_cast<double>(r.n));
    r.no_violations = r.violations == 0;
    r.ADmean = r.no_violations ? 0.0 : sum / static_cast<double>(r.violations);
    return r;
}

void write_table3_csv(std::ostream& out, const std::vector<Table3Row>& rows) {
    out << "asset,Dyn_AE,Dyn_ADmean,Dyn_ADmax,Avg_AE,Avg_ADmean,Avg_ADmax\n";
    for (const auto& row : rows) {
        out << csv_field(row.asset) << ',' << format_double(row.dynamic.AE) << ','
            << format_double(row.dynamic.ADmean) << ',' << format_double(row.dynamic.ADmax) << ','
            << format_double(row.average.AE) << ',' << format_double(row.average.ADmean) << ','
            << format_double(row.average.ADmax) << '\n';
    }
}

void write_backtest_csv(std::ostream& out, const std::vector<std::pair<std::string, BacktestReport>>& rows) {
    out << "label,n,violations,tau,AE,ADmean,ADmax\n";
    for (const auto& [label, r] : rows) {
        out << csv_field(label) << ',' << r.n << ',' << r.violations << ',' << format_double(r.tau) << ','
            << format_double(r.AE) << ',' << format_double(r.ADmean) << ',' << format_double(r.ADmax) << '\n';
    }
}

}  // namespace varmcs::risk
