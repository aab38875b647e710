#pragma once

#include "varmcs/caviar/caviar.hpp"
#include "varmcs/risk/models.hpp"
#include "varmcs/vol/fit_options.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace varmcs::risk {

/// One-step-ahead VaR forecasts of m models over n evaluation periods.
struct ForecastPanel {
    std::vector<std::string> names;
    std::vector<std::vector<double>> var;  // var[i][t], model i at evaluation period t
    std::vector<double> realized;          // y_t aligned with var[i][t]
    std::vector<std::string> dates;        // optional labels, empty or one per period
    double tau = 0.05;

    [[nodiscard]] std::size_t models() const noexcept { return var.size(); }
    [[nodiscard]] std::size_t periods() const noexcept { return realized.size(); }
    /// Throws InputError on ragged columns or non-finite forecasts.
    void validate() const;
};

struct FailedModel {
    std::string label;
    std::string message;
};

struct RollingOptions {
    std::size_t window = 0;     // trailing estimation window, 0 = the in-sample length
    std::size_t refit_every = 10;
    unsigned workers = 1;
    std::uint64_t seed = 1;
    vol::FitOptions fit;        // first estimation of GARCH and GAS models
    int refit_starts = 1;       // optimizer starts at later refits (the warm start is start 0)
    caviar::CaviarFitOptions caviar;
    int caviar_refit_starts = 200;
};

struct RollingResult {
    ForecastPanel panel;
    std::vector<FailedModel> failed;  // excluded from the panel
};

/// Evaluation periods are returns[split..]. The forecast for period t uses the trailing
/// window ending at t-1; parameters are re-estimated every `refit_every` periods and
/// held fixed, with the filter re-run on the current window, in between. If the filter
/// fails with the held parameters the model is re-estimated at that period instead.
/// A model whose estimation fails is dropped from the panel and logged.
RollingResult rolling_var_forecast(const std::vector<ModelSpec>& models, std::span<const double> returns,
                                   std::size_t split, double tau, const RollingOptions& options = {});

/// Layout: header "date,realized,<model>..." then one row per period.
/// An empty date column is written when the panel has no dates.
void write_panel_csv(std::ostream& out, const ForecastPanel& panel);
ForecastPanel read_panel_csv(std::istream& in, double tau);
ForecastPanel read_panel_csv(const std::filesystem::path& path, double tau);

/// Keeps the listed models, in the given order. Throws InputError on an unknown name.
ForecastPanel select_models(const ForecastPanel& panel, const std::vector<std::string>& names);

}  // namespace varmcs::risk
