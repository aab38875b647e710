// varmcs command-line driver.

#include "varmcs/app/config.hpp"
#include "varmcs/app/pipeline.hpp"
#include "varmcs/caviar/caviar.hpp"
#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"
#include "varmcs/data/csv.hpp"
#include "varmcs/data/statistics.hpp"
#include "varmcs/loss/loss.hpp"
#include "varmcs/mcs/mcs.hpp"
#include "varmcs/risk/backtest.hpp"
#include "varmcs/risk/combine.hpp"
#include "varmcs/risk/models.hpp"
#include "varmcs/risk/rolling.hpp"
#include "varmcs/vol/forecast.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace varmcs;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

/// Writes to `path`, or stdout when the path is empty or "-".
template <typename Fn>
void write_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    fn(out);
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw InputError("file '" + path + "' not found");
}

struct DataArgs {
    std::string path;
    std::string date_column = "date";
    std::string value_column;

    void add(CLI::App* cmd) {
        cmd->add_option("--data", path, "Series CSV with a date column and price or return")->required();
        cmd->add_option("--date-column", date_column, "Date column name");
        cmd->add_option("--value-column", value_column, "Value column name (default: price, then return)");
    }
    data::ReturnSeries load() const {
        require_file(path);
        return data::read_series_csv(path, data::CsvColumns{date_column, value_column}).returns;
    }
};

struct McsArgs {
    double alpha = 0.15;
    int B = 5000;
    std::string statistic = "Tmax";
    std::size_t block_length = 0;
    std::uint64_t seed = 1;

    void add(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "MCS confidence level in (0,1)");
        cmd->add_option("--B", B, "Bootstrap replicates");
        cmd->add_option("--statistic", statistic, "TR or Tmax");
        cmd->add_option("--block-length", block_length, "Bootstrap block length (default: AR(p) selection)");
        cmd->add_option("--seed", seed, "Random seed");
    }
    mcs::McsConfig config(unsigned workers) const {
        mcs::McsConfig c;
        c.alpha = alpha;
        c.B = B;
        c.statistic = mcs::parse_statistic(statistic);
        if (block_length > 0) c.block_length = block_length;
        c.seed = seed;
        c.workers = workers;
        return c;
    }
};

void write_table1(std::ostream& out, const std::string& asset, const data::ReturnSeries& returns,
                  std::size_t out_of_sample) {
    out << "period,index,Min,Max,Mean,StdDev,Skewness,Kurtosis,StrLev_5pct,JB\n";
    auto row = [&](const std::string& period, std::span<const double> y) {
        const auto s = data::summary_statistics(y, 0.05);
        out << period << ',' << asset << ',' << format_double(s.min) << ',' << format_double(s.max) << ','
            << format_double(s.mean) << ',' << format_double(s.std_dev) << ',' << format_double(s.skewness) << ','
            << format_double(s.kurtosis) << ',' << format_double(s.quantile) << ',' << format_double(s.jb) << '\n';
    };
    if (out_of_sample == 0) {
        row("full", returns.view());
        return;
    }
    const auto split = data::split_sample(returns, out_of_sample);
    row("in_sample", split.in_sample.view());
    row("out_of_sample", split.out_of_sample.view());
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

loss::LossKind parse_loss_kind(const std::string& text, double tau, double delta) {
    loss::LossKind kind;
    kind.tau = tau;
    kind.delta = delta;
    const auto colon = text.find(':');
    const std::string family = text.substr(0, colon);
    const std::string which = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (family == "var") {
        kind.family = loss::LossKind::Family::VaR;
        kind.var_type = loss::parse_var_loss_type(which.empty() ? "normal" : which);
    } else if (family == "vol") {
        kind.family = loss::LossKind::Family::Vol;
        kind.vol = loss::parse_vol_loss(which.empty() ? "QLIKE" : which);
    } else if (family == "level") {
        kind.family = loss::LossKind::Family::Level;
        kind.level = loss::parse_level_loss(which.empty() ? "SE" : which);
    } else {
        throw InputError("loss must be var[:normal|differentiable], vol:<SE1|SE2|QLIKE|R2LOG|AE1|AE2> or level:<SE|AE>");
    }
    return kind;
}

std::string fit_model(const risk::ModelSpec& model, std::span<const double> y, double tau, std::uint64_t seed,
                      int caviar_starts, unsigned workers) {
    std::ostringstream out;
    if (const auto* g = std::get_if<vol::GarchSpec>(&model.spec)) {
        vol::FitOptions fo;
        fo.seed = seed;
        const auto fit = vol::fit_garch(*g, y, fo);
        out << vol::export_parameters(fit);
        out << "var_next = " << format_double(vol::var_from_model(fit, tau)) << '\n';
    } else if (const auto* s = std::get_if<vol::GasSpec>(&model.spec)) {
        vol::FitOptions fo;
        fo.seed = seed;
        const auto fit = vol::fit_gas(*s, y, fo);
        out << vol::export_parameters(fit);
        out << "var_next = " << format_double(vol::var_from_model(fit, tau)) << '\n';
    } else {
        auto spec = std::get<caviar::CaviarSpec>(model.spec);
        spec.tau = tau;
        caviar::CaviarFitOptions co;
        co.seed = seed;
        co.random_starts = caviar_starts;
        co.workers = workers;
        const auto fit = caviar::caviar_fit(spec, y, co);
        out << caviar::export_parameters(fit, y.size());
        out << "var_next = " << format_double(fit.path.next) << '\n';
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("varmcs");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);

    CLI::App app{"Model Confidence Set and VaR forecasting toolkit"};
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    unsigned workers = 1;
    app.add_flag("-v,--verbose", verbose, "Log progress messages");
    app.add_flag("-q,--quiet", quiet, "Log errors only");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1u, 256u));

    // stats
    auto* stats = app.add_subcommand("stats", "Summary statistics table of a return series");
    DataArgs stats_data;
    stats_data.add(stats);
    std::size_t stats_oos = 0;
    std::string stats_asset = "asset";
    std::string stats_out;
    stats->add_option("--out-of-sample", stats_oos, "Validation length; 0 reports the full sample");
    stats->add_option("--asset", stats_asset, "Index label");
    stats->add_option("--out", stats_out, "Output CSV (default stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "Estimate one model and export its parameters");
    DataArgs fit_data;
    fit_data.add(fit);
    std::string fit_model_label;
    double fit_tau = 0.05;
    std::uint64_t fit_seed = 1;
    int fit_caviar_starts = 10000;
    std::string fit_out;
    fit->add_option("--model", fit_model_label, "Model label, e.g. GJRGARCH-T, GAS-N, CAViaR-AS")->required();
    fit->add_option("--tau", fit_tau, "VaR level");
    fit->add_option("--seed", fit_seed, "Random seed");
    fit->add_option("--caviar-starts", fit_caviar_starts, "Random starts for CAViaR");
    fit->add_option("--out", fit_out, "Output file (default stdout)");

    // forecast
    auto* forecast = app.add_subcommand("forecast", "Rolling one-step-ahead VaR forecasts");
    DataArgs fc_data;
    fc_data.add(forecast);
    std::string fc_models;
    std::size_t fc_oos = 0;
    double fc_tau = 0.05;
    risk::RollingOptions fc_options;
    fc_options.caviar.random_starts = 1000;
    std::string fc_out;
    forecast->add_option("--models", fc_models, "Comma-separated model labels, or 'standard'")->required();
    forecast->add_option("--out-of-sample", fc_oos, "Number of evaluation periods")->required();
    forecast->add_option("--tau", fc_tau, "VaR level");
    forecast->add_option("--refit-every", fc_options.refit_every, "Re-estimation interval");
    forecast->add_option("--window", fc_options.window, "Trailing window (default: in-sample length)");
    forecast->add_option("--seed", fc_options.seed, "Random seed");
    forecast->add_option("--caviar-starts", fc_options.caviar.random_starts, "CAViaR random starts at the first fit");
    forecast->add_option("--out", fc_out, "Forecast panel CSV (default stdout)");

    // loss
    auto* loss_cmd = app.add_subcommand("loss", "Loss matrix from a forecast panel");
    std::string loss_panel;
    std::string loss_kind = "var";
    double loss_tau = 0.05;
    double loss_delta = loss::kDefaultSmoothness;
    std::string loss_out;
    loss_cmd->add_option("--panel", loss_panel, "Forecast panel CSV")->required();
    loss_cmd->add_option("--loss", loss_kind, "var[:normal|differentiable], vol:<name> or level:<SE|AE>");
    loss_cmd->add_option("--tau", loss_tau, "VaR level");
    loss_cmd->add_option("--delta", loss_delta, "Smoothness of the differentiable VaR loss");
    loss_cmd->add_option("--out", loss_out, "Loss matrix CSV (default stdout)");

    // mcs
    auto* mcs_cmd = app.add_subcommand("mcs", "Model Confidence Set on a loss matrix");
    std::string mcs_loss;
    std::string mcs_out_dir = ".";
    McsArgs mcs_args;
    mcs_cmd->add_option("--loss", mcs_loss, "Loss matrix CSV")->required();
    mcs_cmd->add_option("--out-dir", mcs_out_dir, "Directory for ssm.csv and ssm.json");
    mcs_args.add(mcs_cmd);

    // combine
    auto* combine = app.add_subcommand("combine", "Average and dynamic VaR combinations");
    std::string comb_panel;
    double comb_tau = 0.05;
    double comb_eta = 10.0;
    double comb_lambda = 0.99;
    std::string comb_models;
    std::string comb_out;
    combine->add_option("--panel", comb_panel, "Forecast panel CSV")->required();
    combine->add_option("--tau", comb_tau, "VaR level");
    combine->add_option("--eta", comb_eta, "Softmax intensity");
    combine->add_option("--lambda", comb_lambda, "Loss discount factor");
    combine->add_option("--models", comb_models, "Comma-separated subset for the dynamic combination");
    combine->add_option("--out", comb_out, "Output CSV (default stdout)");

    // backtest
    auto* bt = app.add_subcommand("backtest", "AE and AD backtests of every panel column");
    std::string bt_panel;
    double bt_tau = 0.05;
    std::string bt_out;
    bt->add_option("--panel", bt_panel, "Forecast panel CSV")->required();
    bt->add_option("--tau", bt_tau, "VaR level");
    bt->add_option("--out", bt_out, "Output CSV (default stdout)");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Full run from a YAML configuration");
    std::string pipe_config;
    std::string pipe_output;
    pipeline->add_option("--config", pipe_config, "Run configuration")->required();
    pipeline->add_option("--output", pipe_output, "Override the output directory");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulated price series from a GARCH-type model");
    std::string sim_model = "GJRGARCH-T";
    std::size_t sim_n = 1000;
    std::uint64_t sim_seed = 1;
    double sim_mu = 0.03, sim_omega = 0.02, sim_alpha = 0.05, sim_beta = 0.9, sim_gamma = 0.5, sim_delta = 2.0,
           sim_nu = 7.0;
    std::string sim_start = "2000-01-03";
    std::string sim_out;
    sim->add_option("--model", sim_model, "Power-family label, e.g. GARCH-N, GJRGARCH-T, APARCH-T");
    sim->add_option("--n", sim_n, "Number of returns");
    sim->add_option("--seed", sim_seed, "Random seed");
    sim->add_option("--mu", sim_mu, "Mean return");
    sim->add_option("--omega", sim_omega, "Variance intercept");
    sim->add_option("--alpha", sim_alpha, "Shock coefficient");
    sim->add_option("--beta", sim_beta, "Lagged variance coefficient");
    sim->add_option("--gamma", sim_gamma, "Asymmetry (GJR, TGARCH, APARCH)");
    sim->add_option("--delta", sim_delta, "Power (APARCH, NGARCH)");
    sim->add_option("--nu", sim_nu, "Student-t degrees of freedom");
    sim->add_option("--start", sim_start, "First date (YYYY-MM-DD)");
    sim->add_option("--out", sim_out, "Price CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }
    if (verbose) spdlog::set_level(spdlog::level::info);
    if (quiet) spdlog::set_level(spdlog::level::err);

    try {
        if (stats->parsed()) {
            const auto returns = stats_data.load();
            write_output(stats_out, [&](std::ostream& out) { write_table1(out, stats_asset, returns, stats_oos); });
        } else if (fit->parsed()) {
            const auto returns = fit_data.load();
            const auto model = risk::parse_model(fit_model_label);
            const auto text = fit_model(model, returns.view(), fit_tau, fit_seed, fit_caviar_starts, workers);
            write_output(fit_out, [&](std::ostream& out) { out << text; });
        } else if (forecast->parsed()) {
            const auto returns = fc_data.load();
            std::vector<risk::ModelSpec> models;
            if (fc_models == "standard")
                models = risk::standard_model_set();
            else
                for (const auto& label : split_list(fc_models)) models.push_back(risk::parse_model(label));
            if (fc_oos == 0 || fc_oos >= returns.size()) throw InputError("--out-of-sample must lie in [1, n)");
            fc_options.workers = workers;
            const std::size_t split = returns.size() - fc_oos;
            auto rolled = risk::rolling_var_forecast(models, returns.view(), split, fc_tau, fc_options);
            for (std::size_t t = split; t < returns.size(); ++t)
                rolled.panel.dates.push_back(data::format_date(returns.dates[t]));
            if (rolled.panel.models() == 0) throw NumericalError("every model failed to produce forecasts");
            write_output(fc_out, [&](std::ostream& out) { risk::write_panel_csv(out, rolled.panel); });
        } else if (loss_cmd->parsed()) {
            require_file(loss_panel);
            const auto panel = risk::read_panel_csv(loss_panel, loss_tau);
            const auto kind = parse_loss_kind(loss_kind, loss_tau, loss_delta);
            const auto matrix = loss::build_loss_matrix(panel.realized, panel.names, panel.var, kind);
            write_output(loss_out, [&](std::ostream& out) { loss::write_loss_csv(out, matrix); });
        } else if (mcs_cmd->parsed()) {
            require_file(mcs_loss);
            const auto matrix = loss::read_loss_csv(fs::path(mcs_loss));
            const auto result = mcs::run_mcs(matrix, mcs_args.config(workers));
            fs::create_directories(mcs_out_dir);
            write_output((fs::path(mcs_out_dir) / "ssm.csv").string(),
                         [&](std::ostream& out) { mcs::write_ssm_csv(out, result); });
            write_output((fs::path(mcs_out_dir) / "ssm.json").string(),
                         [&](std::ostream& out) { mcs::write_ssm_json(out, result); });
            spdlog::info("{} of {} models survive", result.survivors.size(), matrix.models());
        } else if (combine->parsed()) {
            require_file(comb_panel);
            const auto panel = risk::read_panel_csv(comb_panel, comb_tau);
            const auto avg = risk::combine_var_average(panel);
            const auto subset = comb_models.empty() ? panel : risk::select_models(panel, split_list(comb_models));
            const auto dyn = risk::combine_var_dynamic(subset, comb_eta, comb_lambda);
            write_output(comb_out, [&](std::ostream& out) {
                out << "date,realized,VaR_avg,VaR_dyn\n";
                for (std::size_t t = 0; t < panel.periods(); ++t)
                    out << (panel.dates.empty() ? "" : panel.dates[t]) << ',' << format_double(panel.realized[t])
                        << ',' << format_double(avg[t]) << ',' << format_double(dyn.var[t]) << '\n';
            });
        } else if (bt->parsed()) {
            require_file(bt_panel);
            const auto panel = risk::read_panel_csv(bt_panel, bt_tau);
            std::vector<std::pair<std::string, risk::BacktestReport>> rows;
            for (std::size_t i = 0; i < panel.models(); ++i)
                rows.emplace_back(panel.names[i], risk::backtest(panel.realized, panel.var[i], bt_tau));
            write_output(bt_out, [&](std::ostream& out) { risk::write_backtest_csv(out, rows); });
        } else if (pipeline->parsed()) {
            require_file(pipe_config);
            auto config = app::load_run_config(pipe_config);
            if (!pipe_output.empty()) config.output_dir = pipe_output;
            if (app.get_option("--workers")->count() > 0) {
                config.workers = workers;
                config.rolling.workers = workers;
                config.mcs.workers = workers;
            }
            const auto result = app::run_pipeline(config);
            spdlog::info("pipeline complete: {} artifacts, {} survivors", result.artifacts.size(),
                         result.survivors.size());
        } else if (sim->parsed()) {
            const auto model = risk::parse_model(sim_model);
            const auto* spec = std::get_if<vol::GarchSpec>(&model.spec);
            if (!spec) throw InputError("simulate supports GARCH-type models only");
            vol::GarchParams params;
            params.mu = sim_mu;
            params.omega = sim_omega;
            params.alpha = {sim_alpha};
            params.beta = {sim_beta};
            params.gamma = {sim_gamma};
            params.delta = sim_delta;
            params.nu = sim_nu;
            if (spec->family == vol::GarchFamily::GARCH || spec->family == vol::GarchFamily::IGARCH ||
                spec->family == vol::GarchFamily::AVGARCH || spec->family == vol::GarchFamily::NGARCH)
                params.gamma = {0.0};
            Rng rng(sim_seed);
            const auto y = vol::simulate_garch(*spec, params, sim_n, rng);
            data::PriceSeries prices;
            prices.dates = data::business_days(data::parse_date(sim_start), sim_n + 1);
            prices.prices.push_back(100.0);
            for (double r : y) prices.prices.push_back(prices.prices.back() * std::exp(r / 100.0));
            write_output(sim_out, [&](std::ostream& out) { data::write_prices_csv(out, prices); });
        }
    } catch (const InputError& e) {
        spdlog::error("{}", e.what());
        return kExitInput;
    } catch (const NumericalError& e) {
        spdlog::error("{}", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitNumerical;
    }
    return 0;
}
