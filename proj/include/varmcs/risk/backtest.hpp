#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace varmcs::risk {

struct BacktestReport {
    std::size_t n = 0;
    std::size_t violations = 0;  // #{y_t < VaR_t}
    double tau = 0.05;
    double AE = 0.0;             // violations / (tau n)
    double ADmean = 0.0;         // mean |y_t - VaR_t| over violations, 0 without any
    double ADmax = 0.0;
    bool no_violations = false;
};

BacktestReport backtest(std::span<const double> realized, std::span<const double> var, double tau);

struct Table3Row {
    std::string asset;
    BacktestReport dynamic;
    BacktestReport average;
};

/// asset,Dyn_AE,Dyn_ADmean,Dyn_ADmax,Avg_AE,Avg_ADmean,Avg_ADmax
void write_table3_csv(std::ostream& out, const std::vector<Table3Row>& rows);

/// label,n,violations,tau,AE,ADmean,ADmax
void write_backtest_csv(std::ostream& out, const std::vector<std::pair<std::string, BacktestReport>>& rows);

}  // namespace varmcs::risk
