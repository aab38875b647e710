// Acceptance checks, one per invocation: `acceptance N` prints a single
// "criterion N: PASS|FAIL ..." line and exits nonzero on failure.

#include "oracles/naive_mcs.hpp"

#include "varmcs/app/config.hpp"
#include "varmcs/app/pipeline.hpp"
#include "varmcs/common/random.hpp"
#include "varmcs/loss/loss.hpp"
#include "varmcs/mcs/mcs.hpp"
#include "varmcs/risk/backtest.hpp"
#include "varmcs/vol/garch.hpp"
#include "varmcs/vol/gas.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace varmcs;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = VARMCS_SOURCE_DIR;
const fs::path kBinary = VARMCS_BINARY_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format_value(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::size_t line_count(const fs::path& p) {
    const auto text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

mcs::McsConfig mcs_config(mcs::Statistic statistic, int B, std::uint64_t seed) {
    mcs::McsConfig c;
    c.statistic = statistic;
    c.B = B;
    c.seed = seed;
    c.alpha = 0.15;
    return c;
}

// ---------------------------------------------------------------- 1

Outcome oracle_equivalence() {
    int agree = 0;
    std::string first_mismatch;
    for (int c = 0; c < 50; ++c) {
        Rng rng(derive_seed(1000, c));
        const std::size_t m = 3 + uniform_below(rng, 4);
        const std::size_t n = 40 + uniform_below(rng, 61);
        std::normal_distribution<double> z;
        std::uniform_real_distribution<double> offset(0.0, 0.6);
        loss::LossMatrix L;
        std::vector<double> common(n);
        double prev = 0.0;
        for (auto& v : common) v = prev = 0.4 * prev + z(rng);
        for (std::size_t i = 0; i < m; ++i) {
            const double shift = offset(rng);
            L.names.push_back("M" + std::to_string(i + 1));
            L.rows.emplace_back(n);
            for (std::size_t t = 0; t < n; ++t) L.rows[i][t] = std::abs(common[t] + shift + 0.7 * z(rng));
        }
        const auto statistic = c % 2 ? mcs::Statistic::TR : mcs::Statistic::Tmax;
        const std::uint64_t seed = 5000 + c;
        const auto got = mcs::run_mcs(L, mcs_config(statistic, 200, seed));

        const std::size_t p = oracle::naive_block_length(L.rows);
        const auto want = oracle::naive_mcs(L.rows, oracle::naive_indices(n, 200, p, seed), 0.15,
                                            statistic == mcs::Statistic::Tmax);
        auto survivors = got.survivors;
        std::sort(survivors.begin(), survivors.end());
        if (got.block_length == p && got.elimination_order == want.eliminated && survivors == want.survivors)
            ++agree;
        else if (first_mismatch.empty())
            first_mismatch = " first mismatch at case " + std::to_string(c);
    }
    return {agree == 50, std::to_string(agree) + "/50 cases match the naive reference" + first_mismatch};
}

// ---------------------------------------------------------------- 2, 3

loss::LossMatrix iid_losses(std::size_t m, std::size_t n, Rng& rng) {
    std::normal_distribution<double> z(1.0, 1.0);
    loss::LossMatrix L;
    for (std::size_t i = 0; i < m; ++i) {
        L.names.push_back("M" + std::to_string(i + 1));
        L.rows.emplace_back(n);
        for (auto& v : L.rows.back()) v = z(rng);
    }
    return L;
}

Outcome null_behaviour() {
    int kept = 0;
    for (int r = 0; r < 100; ++r) {
        Rng rng(derive_seed(2000, r));
        const auto L = iid_losses(5, 500, rng);
        const auto res = mcs::run_mcs(L, mcs_config(mcs::Statistic::Tmax, 1000, 7000 + r));
        if (res.survivors.size() == 5) ++kept;
    }
    return {kept >= 80, std::to_string(kept) + "/100 runs keep all 5 models (need >= 80)"};
}

double pooled_sd(const loss::LossMatrix& L) {
    double s = 0.0, s2 = 0.0, k = 0.0;
    for (const auto& row : L.rows)
        for (double v : row) {
            s += v;
            s2 += v * v;
            k += 1.0;
        }
    const double mean = s / k;
    return std::sqrt((s2 - k * mean * mean) / (k - 1.0));
}

Outcome power_behaviour() {
    int removed = 0;
    for (int r = 0; r < 100; ++r) {
        Rng rng(derive_seed(3000, r));
        auto L = iid_losses(5, 500, rng);
        const double shift = 5.0 * pooled_sd(L);
        for (auto& v : L.rows[2]) v += shift;
        const auto res = mcs::run_mcs(L, mcs_config(mcs::Statistic::Tmax, 1000, 8000 + r));
        if (std::find(res.survivors.begin(), res.survivors.end(), 2u) == res.survivors.end()) ++removed;
    }
    return {removed >= 99, std::to_string(removed) + "/100 runs eliminate the shifted model (need >= 99)"};
}

// ---------------------------------------------------------------- 4

vol::GasVector fd_score(const vol::GasSpec& spec, vol::GasVector zeta, double y) {
    vol::GasVector g{};
    for (std::size_t k = 0; k < vol::gas_dimension(spec); ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(zeta[k]));
        auto up = zeta, dn = zeta;
        up[k] += h;
        dn[k] -= h;
        g[k] = (vol::gas_log_density(spec, up, y) - vol::gas_log_density(spec, dn, y)) / (2 * h);
    }
    return g;
}

Outcome gas_correctness() {
    const vol::GasSpec gaussian{vol::GasDist::Gaussian, vol::Scaling::InverseFisher, false};
    const vol::GasSpec student{vol::GasDist::StudentT, vol::Scaling::InverseFisher, false};
    Rng rng(4040);
    std::uniform_real_distribution<double> mu(-1, 1), s2(0.2, 4), nu(2.5, 40), yy(-4, 4);

    double worst_rel = 0.0;
    for (int i = 0; i < 20; ++i)
        for (const auto* spec : {&gaussian, &student}) {
            const vol::GasVector zeta{mu(rng), s2(rng), spec == &student ? nu(rng) : 0.0};
            const double y = yy(rng);
            const auto a = vol::gas_score(*spec, zeta, y);
            const auto f = fd_score(*spec, zeta, y);
            for (std::size_t k = 0; k < vol::gas_dimension(*spec); ++k)
                worst_rel = std::max(worst_rel, std::abs(a[k] - f[k]) / std::max(1.0, std::abs(f[k])));
        }

    // Monte Carlo E[score score'] at 1e6 draws, upper triangle of each matrix
    double worst_z = 0.0;
    int entries = 0, outside = 0;
    const std::size_t draws = 1000000;
    for (int i = 0; i < 5; ++i)
        for (const auto* spec : {&gaussian, &student}) {
            const vol::GasVector zeta{mu(rng), s2(rng), spec == &student ? nu(rng) : 0.0};
            const auto info = vol::gas_fisher(*spec, zeta);
            const std::size_t d = vol::gas_dimension(*spec);
            Rng draw_rng(derive_seed(4041, static_cast<std::uint64_t>(entries)));
            std::normal_distribution<double> z;
            std::student_t_distribution<double> t(spec == &student ? zeta[2] : 5.0);
            double sum[3][3]{}, sq[3][3]{};
            for (std::size_t r = 0; r < draws; ++r) {
                const double y = spec == &student ? zeta[0] + std::sqrt(zeta[1]) * t(draw_rng)
                                                  : zeta[0] + std::sqrt(zeta[1]) * z(draw_rng);
                const auto g = vol::gas_score(*spec, zeta, y);
                for (std::size_t a = 0; a < d; ++a)
                    for (std::size_t b = a; b < d; ++b) {
                        sum[a][b] += g[a] * g[b];
                        sq[a][b] += g[a] * g[a] * g[b] * g[b];
                    }
            }
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a; b < d; ++b) {
                    const double mean = sum[a][b] / draws;
                    const double se = std::sqrt((sq[a][b] / draws - mean * mean) / draws);
                    const double zscore = se > 0.0 ? std::abs(mean - info[a][b]) / se : 0.0;
                    worst_z = std::max(worst_z, zscore);
                    ++entries;
                    if (zscore > 3.0) ++outside;
                }
        }
    const bool pass = worst_rel <= 1e-5 && outside == 0;
    return {pass, "score rel err " + format_value("%.2e", worst_rel) + " (<= 1e-5); Fisher entries beyond 3 s.e.: " +
                      std::to_string(outside) + "/" + std::to_string(entries) + ", max |z| " + format_value("%.2f", worst_z)};
}

// ---------------------------------------------------------------- 5

Outcome mle_recovery() {
    vol::GarchSpec spec;
    vol::GarchParams truth;
    truth.omega = 0.1;
    truth.alpha = {0.05};
    truth.beta = {0.90};
    vol::FitOptions fo;
    fo.starts = 2;
    int within = 0;
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
        Rng rng(derive_seed(5000, s));
        const auto y = vol::simulate_garch(spec, truth, 5000, rng);
        fo.seed = 100 + s;
        const auto fit = vol::fit_garch(spec, y, fo);
        const double err = std::max({std::abs(fit.params.omega - truth.omega), std::abs(fit.params.alpha[0] - 0.05),
                                     std::abs(fit.params.beta[0] - 0.90)});
        worst = std::max(worst, err);
        if (err <= 0.05) ++within;
    }
    return {within >= 90, std::to_string(within) + "/100 seeds within 0.05 element-wise (need >= 90), worst " +
                              format_value("%.3f", worst)};
}

// ---------------------------------------------------------------- 6

Outcome tick_quantile() {
    Rng rng(6060);
    std::normal_distribution<double> z;
    std::vector<double> y(100000);
    for (auto& v : y) v = z(rng);
    auto sorted = y;
    std::sort(sorted.begin(), sorted.end());

    bool pass = true;
    std::string detail;
    for (double tau : {0.01, 0.05, 0.25}) {
        // the mean tick loss is minimized on [y_(k), y_(k+1)] with k = tau n
        const auto k = static_cast<std::size_t>(std::llround(tau * y.size()));
        const double lo = sorted[k - 1], hi = sorted[k];
        double best = std::numeric_limits<double>::infinity(), arg = 0.0;
        std::vector<double> c(y.size());
        for (long g = -4000; g <= 1000; ++g) {
            const double level = g * 1e-3;
            std::fill(c.begin(), c.end(), level);
            const auto l = loss::loss_var(y, c, tau);
            double s = 0.0;
            for (double v : l) s += v;
            if (s < best) {
                best = s;
                arg = level;
            }
        }
        const double miss = std::max({0.0, lo - arg, arg - hi});
        const bool ok = miss <= 1e-3;
        pass = pass && ok;
        detail += std::string(detail.empty() ? "" : " ") + "tau=" + format_value("%g", tau) + ": argmin " + format_value("%.3f", arg) + " vs quantile " + format_value("%.4f", lo) +
                  (ok ? " ok;" : " MISS;");
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 7

double sup_sigma_gap(const vol::VarianceFilter& a, const vol::VarianceFilter& b) {
    double gap = 0.0;
    for (std::size_t t = 0; t < a.sigma2.size(); ++t)
        gap = std::max(gap, std::abs(std::sqrt(a.sigma2[t]) - std::sqrt(b.sigma2[t])));
    return std::max(gap, std::abs(std::sqrt(a.next_sigma2) - std::sqrt(b.next_sigma2)));
}

Outcome nesting() {
    Rng rng(7070);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z;
    vol::GarchSpec aparch;
    aparch.family = vol::GarchFamily::APARCH;
    std::map<std::string, double> worst;
    for (int draw = 0; draw < 10; ++draw) {
        const double scale = 0.5 + 2.0 * u(rng);
        std::vector<double> y(500);
        for (auto& v : y) v = scale * z(rng);
        vol::GarchParams base;
        base.mu = 0.1 * z(rng);
        base.omega = 0.01 + 0.2 * u(rng);
        base.alpha = {0.02 + 0.1 * u(rng)};
        base.beta = {0.5 + 0.35 * u(rng)};
        const double gamma = -0.5 + u(rng);

        auto check = [&](const std::string& name, vol::GarchFamily family, double g, double delta) {
            vol::GarchSpec spec;
            spec.family = family;
            vol::GarchParams p = base;
            if (family == vol::GarchFamily::TGARCH || family == vol::GarchFamily::GJRGARCH) p.gamma = {g};
            vol::GarchParams a = base;
            a.gamma = {g};
            a.delta = delta;
            const double gap = sup_sigma_gap(vol::filter_variance(spec, p, y), vol::filter_variance(aparch, a, y));
            worst[name] = std::max(worst[name], gap);
        };
        check("GARCH", vol::GarchFamily::GARCH, 0.0, 2.0);
        check("AVGARCH", vol::GarchFamily::AVGARCH, 0.0, 1.0);
        check("TGARCH", vol::GarchFamily::TGARCH, gamma, 1.0);
        check("GJRGARCH", vol::GarchFamily::GJRGARCH, std::abs(gamma), 2.0);
    }
    bool pass = true;
    std::string detail;
    for (const auto& [name, gap] : worst) {
        pass = pass && gap <= 1e-12;
        detail += " " + name + " " + format_value("%.1e", gap) + ";";
    }
    return {pass, "sup |sigma diff| over 10 draws:" + detail};
}

// ---------------------------------------------------------------- 8

Outcome backtest_arithmetic() {
    std::vector<double> y(2000, 0.5), var(2000, -1.0);
    for (std::size_t t = 0; t < 155; ++t) y[t * 12 + 3] = -1.0 - 0.01 * static_cast<double>(t + 1);
    const auto r = risk::backtest(y, var, 0.05);
    bool pass = r.violations == 155 && r.AE == 1.55;

    // hand fixtures for the depth measures
    const auto a = risk::backtest(std::vector<double>{-3.0, 0.2, -1.0, -1.5, -0.4},
                                  std::vector<double>{-2.0, -1.0, -1.0, -1.0, -0.5}, 0.2);
    // violations at t=0 (depth 1) and t=3 (depth 0.5); t=2 sits on the VaR and does not count
    pass = pass && a.violations == 2 && a.AE == 2.0 && a.ADmean == 0.75 && a.ADmax == 1.0;
    const auto none = risk::backtest(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0}, 0.05);
    pass = pass && none.violations == 0 && none.AE == 0.0 && none.ADmean == 0.0 && none.ADmax == 0.0;
    return {pass, "AE " + format_value("%.17g", r.AE) + " from V=" + std::to_string(r.violations) +
                      ", n=2000; fixture ADmean " + format_value("%g", a.ADmean) + ", ADmax " + format_value("%g", a.ADmax)};
}

// ---------------------------------------------------------------- 9

Outcome determinism() {
    auto config = app::load_run_config(kSource / "configs/smoke.yaml");
    const fs::path root = kBinary / "acceptance_determinism";
    fs::remove_all(root);
    std::vector<fs::path> dirs;
    for (unsigned workers : {1u, 1u, 8u, 8u}) {
        auto c = config;
        c.workers = workers;
        c.rolling.workers = workers;
        c.mcs.workers = workers;
        c.output_dir = root / ("run" + std::to_string(dirs.size()) + "_w" + std::to_string(workers));
        app::run_pipeline(c);
        dirs.push_back(c.output_dir);
    }
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    std::string differing;
    for (const auto& d : dirs) {
        std::size_t count = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(d)) ++count;
        if (count != names.size()) differing += " " + d.filename().string() + "(file count)";
        for (const auto& name : names)
            if (slurp(d / name) != slurp(dirs[0] / name)) differing += " " + d.filename().string() + "/" + name;
    }
    return {differing.empty() && !names.empty(),
            std::to_string(names.size()) + " files compared over 4 runs (workers 1,1,8,8)" +
                (differing.empty() ? ", all byte-identical" : "; differing:" + differing)};
}

// ---------------------------------------------------------------- 10

Outcome table_shapes() {
    auto config = app::load_run_config(kSource / "configs/simulated.yaml");
    config.output_dir = kBinary / "acceptance_tables";
    fs::remove_all(config.output_dir);
    app::run_pipeline(config);
    const auto& out = config.output_dir;
    struct Expect {
        const char* file;
        const char* header;
        std::size_t min_rows;
    };
    const Expect expected[] = {
        {"table1.csv", "period,index,Min,Max,Mean,StdDev,Skewness,Kurtosis,StrLev_5pct,JB", 2},
        {"ssm.csv", "model,Rank_R,t_ij,p_value_R,Rank_max,t_i,p_value_max,Loss_x1e3", 1},
        {"table3.csv", "asset,Dyn_AE,Dyn_ADmean,Dyn_ADmax,Avg_AE,Avg_ADmean,Avg_ADmax", 1},
    };
    bool pass = true;
    std::string detail;
    for (const auto& e : expected) {
        const bool header = first_line(out / e.file) == e.header;
        const std::size_t rows = line_count(out / e.file) - 1;
        const bool ok = header && rows >= e.min_rows;
        pass = pass && ok;
        detail += std::string(detail.empty() ? "" : " ") + e.file + " " + (ok ? "ok" : "BAD") + " (" + std::to_string(rows) + " rows);";
    }
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::function<Outcome()>> criteria{
        {1, oracle_equivalence}, {2, null_behaviour},      {3, power_behaviour}, {4, gas_correctness},
        {5, mle_recovery},       {6, tick_quantile},       {7, nesting},         {8, backtest_arithmetic},
        {9, determinism},        {10, table_shapes},
    };
    spdlog::set_default_logger(spdlog::stderr_color_st("acceptance"));
    const int which = argc == 2 ? std::atoi(argv[1]) : 0;
    const auto it = criteria.find(which);
    if (it == criteria.end()) {
        std::cerr << "usage: acceptance <1-10>\n";
        return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = it->second();
    } catch (const std::exception& e) {
        outcome = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << which << ": " << (outcome.pass ? "PASS" : "FAIL") << " " << outcome.detail << " ["
              << format_value("%.1f", secs) << " s]\n";
    return outcome.pass ? 0 : 1;
}
