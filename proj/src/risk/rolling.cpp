#include "varmcs/risk/rolling.hpp"

#include "varmcs/common/csv.hpp"
#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"
#include "varmcs/common/hash.hpp"
#include "varmcs/common/parallel.hpp"
#include "varmcs/common/random.hpp"
#include "varmcs/vol/forecast.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

namespace varmcs::risk {

namespace {

struct Context {
    const std::string& label;
    std::span<const double> y;
    std::size_t split;
    std::size_t window;
    double tau;
    const RollingOptions& options;
    std::uint64_t seed;

    [[nodiscard]] std::size_t periods() const { return y.size() - split; }
    [[nodiscard]] std::span<const double> window_before(std::size_t k) const {
        return y.subspan(split + k - window, window);
    }
    [[nodiscard]] bool refit_at(std::size_t k) const { return k % options.refit_every == 0; }
};

[[noreturn]] void rethrow_at(std::size_t k, bool refit) {
    const std::string where =
        std::string(refit ? " (refit" : " (filter") + " at evaluation period " + std::to_string(k + 1) + ")";
    try {
        throw;
    } catch (const InputError& e) {
        throw InputError(e.what() + where);
    } catch (const std::exception& e) {
        throw NumericalError(e.what() + where);
    }
}

/// Calls step(k, window, refit) for every evaluation period, tagging failures with the period.
/// A failed filter step is retried once as a refit.
template <typename Step>
std::vector<double> drive(const Context& ctx, Step&& step) {
    std::vector<double> out(ctx.periods());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const bool refit = ctx.refit_at(k);
        try {
            out[k] = step(k, ctx.window_before(k), refit);
            continue;
        } catch (...) {
            if (refit) rethrow_at(k, true);
        }
        // Frozen parameters broke down on the shifted window: re-estimate early once.
        spdlog::debug("{}: early re-estimation at evaluation period {}", ctx.label, k + 1);
        try {
            out[k] = step(k, ctx.window_before(k), true);
        } catch (...) {
            rethrow_at(k, true);
        }
    }
    return out;
}

std::vector<double> run_model(const vol::GarchSpec& spec, const Context& ctx) {
    std::optional<vol::FittedGarch> fitted;
    return drive(ctx, [&](std::size_t k, std::span<const double> window, bool refit) {
        if (refit) {
            vol::FitOptions fo = ctx.options.fit;
            fo.seed = derive_seed(ctx.seed, k);
            std::optional<vol::GarchParams> warm;
            if (fitted) {
                fo.starts = ctx.options.refit_starts;
                warm = fitted->params;
            }
            fitted = vol::fit_garch(spec, window, fo, warm);
        } else {
            fitted->path = vol::filter_variance(spec, fitted->params, window);
        }
        return vol::var_from_model(*fitted, ctx.tau);
    });
}

std::vector<double> run_model(const vol::GasSpec& spec, const Context& ctx) {
    std::optional<vol::FittedGas> fitted;
    return drive(ctx, [&](std::size_t k, std::span<const double> window, bool refit) {
        if (refit) {
            vol::FitOptions fo = ctx.options.fit;
            fo.seed = derive_seed(ctx.seed, k);
            std::optional<vol::GasParams> warm;
            if (fitted) {
                fo.starts = ctx.options.refit_starts;
                warm = fitted->params;
            }
            fitted = vol::fit_gas(spec, window, fo, {}, warm);
        } else {
            fitted->path = vol::gas_filter(spec, fitted->params, window);
        }
        return vol::var_from_model(*fitted, ctx.tau);
    });
}

std::vector<double> run_model(const caviar::CaviarSpec& base, const Context& ctx) {
    caviar::CaviarSpec spec = base;
    spec.tau = ctx.tau;
    std::optional<caviar::CaviarParams> params;
    return drive(ctx, [&](std::size_t k, std::span<const double> window, bool refit) {
        if (refit) {
            caviar::CaviarFitOptions co = ctx.options.caviar;
            co.seed = derive_seed(ctx.seed, k);
            co.workers = 1;
            if (params) {
                co.random_starts = ctx.options.caviar_refit_starts;
                co.warm_start = params;
            }
            params = caviar::caviar_fit(spec, window, co).params;
        }
        return caviar::caviar_forecast(spec, *params, window);
    });
}

}  // namespace

void ForecastPanel::validate() const {
    if (names.size() != var.size()) throw InputError("forecast panel: names and columns differ in number");
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("forecast panel: tau must lie in (0,1)");
    if (!dates.empty() && dates.size() != realized.size())
        throw InputError("forecast panel: dates and realized returns differ in length");
    for (std::size_t t = 0; t < realized.size(); ++t)
        if (!std::isfinite(realized[t]))
            throw InputError("forecast panel: realized return at period " + std::to_string(t + 1) + " is not finite");
    for (std::size_t i = 0; i < var.size(); ++i) {
        if (var[i].size() != realized.size())
            throw InputError("forecast panel: column '" + names[i] + "' has the wrong length");
        for (std::size_t t = 0; t < var[i].size(); ++t)
            if (!std::isfinite(var[i][t]))
                throw InputError("forecast panel: '" + names[i] + "' is not finite at period " +
                                 std::to_string(t + 1));
    }
}

RollingResult rolling_var_forecast(const std::vector<ModelSpec>& models, std::span<const double> returns,
                                   std::size_t split, double tau, const RollingOptions& options) {
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("VaR level tau must lie in (0,1)");
    if (options.refit_every < 1) throw InputError("refit_every must be at least 1");
    if (split >= returns.size()) throw InputError("the split leaves no evaluation periods");
    const std::size_t window = options.window == 0 ? split : options.window;
    if (window > split) throw InputError("the estimation window is longer than the in-sample period");
    if (window < 250)
        throw InputError("the estimation window has " + std::to_string(window) + " observations; at least 250 needed");

    struct Column {
        std::vector<double> values;
        std::string error;
    };
    std::vector<Column> columns(models.size());
    parallel_for(models.size(), options.workers, [&](std::size_t i) {
        const Context ctx{models[i].label, returns, split, window, tau, options, derive_seed(options.seed, fnv1a64(models[i].label))};
        try {
            columns[i].values = std::visit([&](const auto& spec) { return run_model(spec, ctx); }, models[i].spec);
            for (std::size_t t = 0; t < columns[i].values.size(); ++t)
                if (!std::isfinite(columns[i].values[t]))
                    throw NumericalError("non-finite VaR forecast at evaluation period " + std::to_string(t + 1));
        } catch (const std::exception& e) {
            columns[i].values.clear();
            columns[i].error = e.what();
        }
    });

    RollingResult result;
    result.panel.tau = tau;
    result.panel.realized.assign(returns.begin() + static_cast<std::ptrdiff_t>(split), returns.end());
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (!columns[i].error.empty()) {
            spdlog::warn("{}: excluded from the forecast panel: {}", models[i].label, columns[i].error);
            result.failed.push_back({models[i].label, columns[i].error});
            continue;
        }
        if (tau < 0.5) {
            const auto& col = columns[i].values;
            const auto negative = std::count_if(col.begin(), col.end(), [](double v) { return v < 0.0; });
            if (static_cast<double>(negative) < 0.95 * static_cast<double>(col.size()))
                spdlog::warn("{}: only {} of {} lower-tail VaR forecasts are negative", models[i].label, negative,
                             col.size());
        }
        result.panel.names.push_back(models[i].label);
        result.panel.var.push_back(std::move(columns[i].values));
    }
    return result;
}

void write_panel_csv(std::ostream& out, const ForecastPanel& panel) {
    panel.validate();
    out << "date,realized";
    for (const auto& name : panel.names) out << ',' << csv_field(name);
    out << '\n';
    for (std::size_t t = 0; t < panel.periods(); ++t) {
        if (!panel.dates.empty()) out << csv_field(panel.dates[t]);
        out << ',' << format_double(panel.realized[t]);
        for (const auto& col : panel.var) out << ',' << format_double(col[t]);
        out << '\n';
    }
}

ForecastPanel read_panel_csv(std::istream& in, double tau) {
    ForecastPanel panel;
    panel.tau = tau;
    std::string line;
    if (!std::getline(in, line)) throw InputError("forecast panel CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "date" || header[1] != "realized")
        throw InputError("forecast panel CSV must start with 'date,realized' and at least one model column");
    panel.names.assign(header.begin() + 2, header.end());
    panel.var.resize(panel.names.size());
    bool any_date = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw InputError("forecast panel CSV line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        panel.dates.push_back(fields[0]);
        any_date = any_date || !fields[0].empty();
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto v = parse_double(fields[c]);
            if (!v || !std::isfinite(*v))
                throw InputError("forecast panel CSV line " + std::to_string(line_no) + ": bad number '" + fields[c] +
                                 "' in column '" + header[c] + "'");
            if (c == 1)
                panel.realized.push_back(*v);
            else
                panel.var[c - 2].push_back(*v);
        }
    }
    if (!any_date) panel.dates.clear();
    if (panel.realized.empty()) throw InputError("forecast panel CSV has no data rows");
    panel.validate();
    return panel;
}

ForecastPanel read_panel_csv(const std::filesystem::path& path, double tau) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open forecast panel '" + path.string() + "'");
    return read_panel_csv(in, tau);
}

ForecastPanel select_models(const ForecastPanel& panel, const std::vector<std::string>& names) {
    ForecastPanel out;
    out.realized = panel.realized;
    out.dates = panel.dates;
    out.tau = panel.tau;
    for (const auto& name : names) {
        const auto it = std::find(panel.names.begin(), panel.names.end(), name);
        if (it == panel.names.end()) throw InputError("model '" + name + "' is not in the forecast panel");
        out.names.push_back(name);
        out.var.push_back(panel.var[static_cast<std::size_t>(it - panel.names.begin())]);
    }
    return out;
}

}  // namespace varmcs::risk
