#include "varmcs/app/pipeline.hpp"

#include "varmcs/common/csv.hpp"
#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"
#include "varmcs/common/hash.hpp"
#include "varmcs/data/csv.hpp"
#include "varmcs/data/statistics.hpp"
#include "varmcs/risk/backtest.hpp"
#include "varmcs/risk/combine.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <optional>
#include <sstream>

namespace varmcs::app {

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const InputError& e) {
        throw InputError("stage '" + name + "': " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError("stage '" + name + "': " + e.what());
    } catch (const std::exception& e) {
        throw NumericalError("stage '" + name + "': " + e.what());
    }
}

class Writer {
public:
    Writer(std::filesystem::path dir, PipelineResult& result) : dir_(std::move(dir)), result_(result) {}

    template <typename Fn>
    void emit(const std::string& name, Fn&& fn) {
        const auto path = dir_ / name;
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) throw InputError("cannot write '" + path.string() + "'");
            fn(out);
            if (!out) throw InputError("write to '" + path.string() + "' failed");
        }
        result_.artifacts.push_back({name, file_checksum(path)});
    }

private:
    std::filesystem::path dir_;
    PipelineResult& result_;
};

void write_table1_row(std::ostream& out, const std::string& period, const std::string& asset,
                      const data::SummaryStats& s) {
    out << period << ',' << csv_field(asset) << ',' << format_double(s.min) << ',' << format_double(s.max) << ','
        << format_double(s.mean) << ',' << format_double(s.std_dev) << ',' << format_double(s.skewness) << ','
        << format_double(s.kurtosis) << ',' << format_double(s.quantile) << ',' << format_double(s.jb) << '\n';
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& config, const PipelineResult& result,
                    const std::optional<std::string>& failure) {
    std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
    out << "config_hash = " << to_hex(fnv1a64(canonical_config(config))) << '\n';
    out << "mcs_seed = " << config.mcs.seed << '\n';
    out << "forecast_seed = " << config.rolling.seed << '\n';
    out << "status = " << (failure ? "failed" : "complete") << '\n';
    if (failure) out << "failure = " << *failure << '\n';
    for (const auto& f : result.failed_models) out << "excluded_model = " << f.label << ": " << f.message << '\n';
    for (const auto& a : result.artifacts) out << "artifact = " << a.name << ' ' << a.checksum << '\n';
}

}  // namespace

std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return to_hex(fnv1a64(bytes.str()));
}

PipelineResult run_pipeline(const RunConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.output_dir);
    PipelineResult result;
    Writer writer(config.output_dir, result);
    try {
        const auto returns = stage("data", [&] {
            data::CsvColumns columns;
            columns.date = config.date_column;
            columns.value = config.value_column;
            return data::read_series_csv(config.data_path, columns).returns;
        });
        const auto split = stage("data", [&] { return data::split_sample(returns, config.out_of_sample); });

        stage("stats", [&] {
            const auto in_stats = data::summary_statistics(split.in_sample.view(), 0.05);
            const auto out_stats = data::summary_statistics(split.out_of_sample.view(), 0.05);
            writer.emit("table1.csv", [&](std::ostream& out) {
                out << "period,index,Min,Max,Mean,StdDev,Skewness,Kurtosis,StrLev_5pct,JB\n";
                write_table1_row(out, "in_sample", config.asset, in_stats);
                write_table1_row(out, "out_of_sample", config.asset, out_stats);
            });
            return 0;
        });

        auto panel = stage("forecast", [&] {
            spdlog::info("forecasting {} models over {} periods", config.models.size(), split.out_of_sample.size());
            auto rolled = risk::rolling_var_forecast(config.models, returns.view(), split.in_sample.size(), config.tau,
                                                     config.rolling);
            result.failed_models = rolled.failed;
            for (const auto& d : split.out_of_sample.dates) rolled.panel.dates.push_back(data::format_date(d));
            if (rolled.panel.models() == 0) throw NumericalError("every model failed to produce forecasts");
            writer.emit("forecast_panel.csv", [&](std::ostream& out) { risk::write_panel_csv(out, rolled.panel); });
            return rolled.panel;
        });

        const auto losses = stage("loss", [&] {
            loss::LossKind kind;
            kind.family = loss::LossKind::Family::VaR;
            kind.var_type = config.loss_type;
            kind.tau = config.tau;
            kind.delta = config.loss_delta;
            auto matrix = loss::build_loss_matrix(panel.realized, panel.names, panel.var, kind);
            writer.emit("loss_matrix.csv", [&](std::ostream& out) { loss::write_loss_csv(out, matrix); });
            return matrix;
        });

        const auto ssm = stage("mcs", [&] {
            spdlog::info("running the MCS on {} models", losses.models());
            auto res = mcs::run_mcs(losses, config.mcs);
            writer.emit("ssm.csv", [&](std::ostream& out) { mcs::write_ssm_csv(out, res); });
            writer.emit("ssm.json", [&](std::ostream& out) { mcs::write_ssm_json(out, res); });
            return res;
        });
        for (std::size_t idx : ssm.survivors) result.survivors.push_back(losses.names[idx]);

        const auto [average, dynamic] = stage("combine", [&] {
            auto avg = risk::combine_var_average(panel);
            auto dyn = risk::combine_var_dynamic(risk::select_models(panel, result.survivors), config.eta,
                                                 config.lambda);
            writer.emit("combination.csv", [&](std::ostream& out) {
                out << "date,realized,VaR_avg,VaR_dyn\n";
                for (std::size_t t = 0; t < panel.periods(); ++t)
                    out << panel.dates[t] << ',' << format_double(panel.realized[t]) << ',' << format_double(avg[t])
                        << ',' << format_double(dyn.var[t]) << '\n';
            });
            writer.emit("combination_weights.csv", [&](std::ostream& out) {
                out << "date";
                for (const auto& name : result.survivors) out << ',' << csv_field(name);
                out << '\n';
                for (std::size_t t = 0; t < panel.periods(); ++t) {
                    out << panel.dates[t];
                    for (double w : dyn.weights[t]) out << ',' << format_double(w);
                    out << '\n';
                }
            });
            return std::pair{std::move(avg), std::move(dyn.var)};
        });

        stage("backtest", [&] {
            std::vector<std::pair<std::string, risk::BacktestReport>> rows;
            for (std::size_t i = 0; i < panel.models(); ++i)
                rows.emplace_back(panel.names[i], risk::backtest(panel.realized, panel.var[i], config.tau));
            const auto avg_report = risk::backtest(panel.realized, average, config.tau);
            const auto dyn_report = risk::backtest(panel.realized, dynamic, config.tau);
            rows.emplace_back("VaR_avg", avg_report);
            rows.emplace_back("VaR_dyn", dyn_report);
            writer.emit("backtest.csv", [&](std::ostream& out) { risk::write_backtest_csv(out, rows); });
            writer.emit("table3.csv", [&](std::ostream& out) {
                risk::write_table3_csv(out, {{config.asset, dyn_report, avg_report}});
            });
            return 0;
        });
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        write_manifest(config.output_dir, config, result, std::string(e.what()));
        throw;
    }
    write_manifest(config.output_dir, config, result, std::nullopt);
    return result;
}

}  // namespace varmcs::app
