#include "varmcs/mcs/mcs.hpp"

#include "varmcs/common/errors.hpp"
#include "varmcs/common/parallel.hpp"
#include "varmcs/common/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace varmcs::mcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCritical = 1.96;

double studentize(double mean, double var) {
    if (var > 0.0) return mean / std::sqrt(var);
    if (mean == 0.0) return 0.0;
    return mean > 0.0 ? kInf : -kInf;
}

struct ArFit {
    std::size_t largest_significant = 0;
    std::size_t significant = 0;
    bool usable = false;
};

ArFit fit_ar(const std::vector<double>& d, std::size_t order) {
    ArFit out;
    const std::size_t n = d.size();
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    if (*lo == *hi) return out;  // constant differential
    const std::size_t rows = n - order;
    const std::size_t cols = order + 1;
    if (rows <= cols) return out;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + order;
        y(static_cast<Eigen::Index>(r)) = d[t];
        X(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (std::size_t l = 1; l <= order; ++l) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) = d[t - l];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) return out;
    const Eigen::VectorXd coef = qr.solve(y);
    const Eigen::VectorXd resid = y - X * coef;
    const double s2 = resid.squaredNorm() / static_cast<double>(rows - cols);
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    out.usable = true;
    for (std::size_t l = 1; l <= order; ++l) {
        const auto k = static_cast<Eigen::Index>(l);
        const double se = std::sqrt(s2 * xtx_inv(k, k));
        const double t = se > 0.0 ? coef(k) / se : 0.0;
        if (std::abs(t) > kCritical) {
            ++out.significant;
            out.largest_significant = l;
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(Statistic statistic) { return statistic == Statistic::TR ? "TR" : "Tmax"; }

Statistic parse_statistic(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "tr") return Statistic::TR;
    if (lower == "tmax") return Statistic::Tmax;
    throw InputError("statistic must be TR or Tmax, got '" + std::string(name) + "'");
}

void McsConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("MCS alpha must lie in (0,1)");
    if (B < 100) throw InputError("MCS needs at least 100 bootstrap replicates");
    if (block_length && *block_length < 1) throw InputError("block length must be at least 1");
}

BlockLengthSelection select_block_length(const loss::LossMatrix& losses) {
    losses.validate();
    const std::size_t n = losses.periods();
    if (n < 30) throw InputError("block length selection needs at least 30 periods, got " + std::to_string(n));
    BlockLengthSelection sel;
    sel.max_order = std::min<std::size_t>(10, static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n)) + 1e-9)));
    sel.max_order = std::max<std::size_t>(1, sel.max_order);
    const std::size_t m = losses.models();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t t = 0; t < n; ++t) d[t] = losses.rows[i][t] - losses.rows[j][t];
            const ArFit fit = fit_ar(d, sel.max_order);
            if (!fit.usable) continue;
            ++sel.pairs_used;
            sel.length = std::max(sel.length, fit.largest_significant);
            sel.max_significant = std::max(sel.max_significant, fit.significant);
        }
    }
    sel.length = std::max<std::size_t>(1, sel.length);
    return sel;
}

BootstrapIndices::BootstrapIndices(std::size_t n, std::size_t B, std::size_t block_length, std::uint64_t seed)
    : n_(n), block_(block_length) {
    if (n == 0) throw InputError("bootstrap needs a non-empty sample");
    if (block_length < 1 || block_length > n)
        throw InputError("block length must lie in [1, n]; got " + std::to_string(block_length) + " for n=" +
                         std::to_string(n));
    const std::size_t blocks = (n + block_length - 1) / block_length;
    const std::size_t choices = n - block_length + 1;
    Rng rng(seed);
    starts_.resize(B);
    for (auto& row : starts_) {
        row.resize(blocks);
        for (auto& s : row) s = static_cast<std::size_t>(uniform_below(rng, choices));
    }
}

std::vector<std::size_t> BootstrapIndices::indices(std::size_t b) const {
    std::vector<std::size_t> out;
    out.reserve(n_);
    for (std::size_t s : starts_.at(b)) {
        for (std::size_t k = 0; k < block_ && out.size() < n_; ++k) out.push_back(s + k);
    }
    return out;
}

std::vector<std::vector<double>> replicate_means(const loss::LossMatrix& losses, const BootstrapIndices& indices,
                                                 unsigned workers) {
    const std::size_t n = losses.periods();
    if (indices.n() != n) throw InputError("bootstrap indices were drawn for a different sample length");
    const std::size_t m = losses.models();
    std::vector<std::vector<double>> out(indices.replicates(), std::vector<double>(m));
    parallel_for(indices.replicates(), workers, [&](std::size_t b) {
        const auto idx = indices.indices(b);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& row = losses.rows[i];
            double sum = 0.0;
            for (std::size_t t : idx) sum += row[t];
            out[b][i] = sum / static_cast<double>(n);
        }
    });
    return out;
}

EpaStatistics epa_statistics(const std::vector<double>& means, const std::vector<std::vector<double>>& boot_means,
                             std::span<const std::size_t> models) {
    EpaStatistics s;
    if (models.empty()) {
        s.models.resize(means.size());
        std::iota(s.models.begin(), s.models.end(), std::size_t{0});
    } else {
        s.models.assign(models.begin(), models.end());
    }
    const std::size_t k = s.models.size();
    if (k < 2) throw InputError("EPA statistics need at least two models");
    const std::size_t B = boot_means.size();
    if (B == 0) throw InputError("EPA statistics need bootstrap replicates");
    const double kd = static_cast<double>(k);

    s.mean_loss.resize(k);
    for (std::size_t a = 0; a < k; ++a) s.mean_loss[a] = means[s.models[a]];
    // Sums of pairwise differences, so identical models give exactly zero.
    auto relative = [k, kd](const std::vector<double>& m, std::vector<double>& out) {
        for (std::size_t a = 0; a < k; ++a) {
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c)
                if (c != a) sum += m[a] - m[c];
            out[a] = sum / (kd - 1.0);
        }
    };
    s.d_i.resize(k);
    relative(s.mean_loss, s.d_i);
    s.d_ij.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c) s.d_ij[a][c] = s.mean_loss[a] - s.mean_loss[c];

    // Pass 1: bootstrap variances centred on the observed means.
    s.var_i.assign(k, 0.0);
    s.var_ij.assign(k, std::vector<double>(k, 0.0));
    std::vector<double> star(k), star_i(k);
    auto load = [&](std::size_t b) {
        for (std::size_t a = 0; a < k; ++a) star[a] = boot_means[b][s.models[a]];
        relative(star, star_i);
    };
    for (std::size_t b = 0; b < B; ++b) {
        load(b);
        for (std::size_t a = 0; a < k; ++a) {
            const double di = star_i[a] - s.d_i[a];
            s.var_i[a] += di * di;
            for (std::size_t c = a + 1; c < k; ++c) {
                const double dij = (star[a] - star[c]) - s.d_ij[a][c];
                s.var_ij[a][c] += dij * dij;
            }
        }
    }
    const double Bd = static_cast<double>(B);
    for (std::size_t a = 0; a < k; ++a) {
        s.var_i[a] /= Bd;
        for (std::size_t c = a + 1; c < k; ++c) {
            s.var_ij[a][c] /= Bd;
            s.var_ij[c][a] = s.var_ij[a][c];
        }
    }

    s.t_i.resize(k);
    s.t_ij.assign(k, std::vector<double>(k, 0.0));
    s.T_max = -kInf;
    s.T_R = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        s.t_i[a] = studentize(s.d_i[a], s.var_i[a]);
        s.T_max = std::max(s.T_max, s.t_i[a]);
        for (std::size_t c = 0; c < k; ++c) {
            if (a == c) continue;
            s.t_ij[a][c] = studentize(s.d_ij[a][c], s.var_ij[a][c]);
            s.T_R = std::max(s.T_R, std::abs(s.t_ij[a][c]));
        }
    }

    // Pass 2: recentred replicate statistics.
    std::vector<double> sd_i(k);
    std::vector<std::vector<double>> sd_ij(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        sd_i[a] = s.var_i[a] > 0.0 ? std::sqrt(s.var_i[a]) : 0.0;
        for (std::size_t c = a + 1; c < k; ++c) sd_ij[a][c] = s.var_ij[a][c] > 0.0 ? std::sqrt(s.var_ij[a][c]) : 0.0;
    }
    std::size_t exceed_R = 0;
    std::size_t exceed_max = 0;
    for (std::size_t b = 0; b < B; ++b) {
        load(b);
        double tmax = -kInf;
        double tr = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            const double ti = sd_i[a] > 0.0 ? (star_i[a] - s.d_i[a]) / sd_i[a] : 0.0;
            tmax = std::max(tmax, ti);
            for (std::size_t c = a + 1; c < k; ++c) {
                const double tij = sd_ij[a][c] > 0.0 ? ((star[a] - star[c]) - s.d_ij[a][c]) / sd_ij[a][c] : 0.0;
                tr = std::max(tr, std::abs(tij));
            }
        }
        if (tr >= s.T_R) ++exceed_R;
        if (tmax >= s.T_max) ++exceed_max;
    }
    s.p_R = static_cast<double>(exceed_R) / Bd;
    s.p_max = static_cast<double>(exceed_max) / Bd;
    return s;
}

EpaStatistics epa_statistics(const loss::LossMatrix& losses, const BootstrapIndices& indices,
                             std::span<const std::size_t> models, unsigned workers) {
    losses.validate();
    std::vector<double> means(losses.models());
    for (std::size_t i = 0; i < means.size(); ++i)
        means[i] = std::accumulate(losses.rows[i].begin(), losses.rows[i].end(), 0.0) /
                   static_cast<double>(losses.periods());
    return epa_statistics(means, replicate_means(losses, indices, workers), models);
}

namespace {

std::vector<double> model_means(const loss::LossMatrix& losses) {
    std::vector<double> means(losses.models());
    for (std::size_t i = 0; i < means.size(); ++i)
        means[i] = std::accumulate(losses.rows[i].begin(), losses.rows[i].end(), 0.0) /
                   static_cast<double>(losses.periods());
    return means;
}

std::size_t resolve_block_length(const loss::LossMatrix& losses, const McsConfig& config,
                                 std::optional<BlockLengthSelection>& selection) {
    if (config.block_length) {
        if (*config.block_length > losses.periods())
            throw InputError("block length " + std::to_string(*config.block_length) + " exceeds the " +
                             std::to_string(losses.periods()) + " available periods");
        return *config.block_length;
    }
    selection = select_block_length(losses);
    return selection->length;
}

void check_inputs(const loss::LossMatrix& losses, const McsConfig& config) {
    config.validate();
    losses.validate();
    if (losses.models() < 2)
        throw InputError("the MCS procedure needs at least 2 models, got " + std::to_string(losses.models()));
    if (losses.periods() < 10)
        throw InputError("the MCS procedure needs at least 10 periods, got " + std::to_string(losses.periods()));
}

}  // namespace

EpaTestResult epa_test(const loss::LossMatrix& losses, const McsConfig& config) {
    check_inputs(losses, config);
    std::optional<BlockLengthSelection> selection;
    const std::size_t block = resolve_block_length(losses, config, selection);
    const BootstrapIndices indices(losses.periods(), static_cast<std::size_t>(config.B), block, config.seed);
    EpaTestResult r;
    r.details = epa_statistics(model_means(losses), replicate_means(losses, indices, config.workers), {});
    r.statistic = config.statistic == Statistic::TR ? r.details.T_R : r.details.T_max;
    r.p_value = config.statistic == Statistic::TR ? r.details.p_R : r.details.p_max;
    return r;
}

std::size_t eliminate_worst(const EpaStatistics& stats, Statistic statistic) {
    const std::size_t k = stats.models.size();
    if (k < 2) throw InputError("elimination needs at least two models");
    std::size_t worst = 0;
    double worst_value = -kInf;
    for (std::size_t a = 0; a < k; ++a) {
        double v;
        if (statistic == Statistic::Tmax) {
            v = stats.t_i[a];
        } else {
            v = -kInf;
            for (std::size_t c = 0; c < k; ++c)
                if (c != a) v = std::max(v, stats.t_ij[a][c]);
        }
        // Strict comparison on ascending model index keeps the smallest index on ties.
        if (v > worst_value || (v == worst_value && stats.models[a] < stats.models[worst])) {
            worst_value = v;
            worst = a;
        }
    }
    return worst;
}

SsmResult run_mcs(const loss::LossMatrix& losses, const McsConfig& config) {
    check_inputs(losses, config);
    SsmResult result;
    result.config = config;
    result.n = losses.periods();
    result.block_length = resolve_block_length(losses, config, result.selection);

    const std::size_t m = losses.models();
    const auto means = model_means(losses);
    const BootstrapIndices indices(result.n, static_cast<std::size_t>(config.B), result.block_length, config.seed);
    const auto boot = replicate_means(losses, indices, config.workers);

    result.models.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        result.models[i].name = losses.names[i];
        result.models[i].mean_loss = means[i];
    }

    std::vector<std::size_t> set(m);
    std::iota(set.begin(), set.end(), std::size_t{0});
    double running_R = 0.0;
    double running_max = 0.0;
    std::optional<EpaStatistics> final_stats;

    while (set.size() > 1) {
        EpaStatistics stats = epa_statistics(means, boot, set);
        StepRecord step;
        step.models = set;
        step.T_R = stats.T_R;
        step.T_max = stats.T_max;
        step.p_R = stats.p_R;
        step.p_max = stats.p_max;
        running_R = std::max(running_R, stats.p_R);
        running_max = std::max(running_max, stats.p_max);
        const double p = config.statistic == Statistic::TR ? stats.p_R : stats.p_max;
        if (p > config.alpha) {
            result.steps.push_back(std::move(step));
            final_stats = std::move(stats);
            break;
        }
        const std::size_t pos = eliminate_worst(stats, config.statistic);
        const std::size_t model = set[pos];
        step.eliminated = model;
        auto& report = result.models[model];
        report.eliminated_at = result.steps.size();
        report.mcs_p_R = running_R;
        report.mcs_p_max = running_max;
        result.elimination_order.push_back(model);
        result.steps.push_back(std::move(step));
        set.erase(set.begin() + static_cast<std::ptrdiff_t>(pos));
    }

    if (set.size() == 1) {
        auto& last = result.models[set.front()];
        last.survivor = true;
        last.mcs_p_R = 1.0;
        last.mcs_p_max = 1.0;
        last.rank_R = 1;
        last.rank_max = 1;
        last.v_R = 0.0;
        last.v_max = 0.0;
        result.survivors = set;
        return result;
    }

    const auto& fs = *final_stats;
    const std::size_t k = fs.models.size();
    std::vector<double> v_R(k, -kInf);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c)
            if (a != c) v_R[a] = std::max(v_R[a], fs.t_ij[a][c]);
    auto rank_by = [&](const std::vector<double>& v) {
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<int> rank(k);
        for (std::size_t r = 0; r < k; ++r) rank[order[r]] = static_cast<int>(r + 1);
        return std::pair{order, rank};
    };
    const auto [order_R, rank_R] = rank_by(v_R);
    const auto [order_max, rank_max] = rank_by(fs.t_i);
    for (std::size_t a = 0; a < k; ++a) {
        auto& rep = result.models[fs.models[a]];
        rep.survivor = true;
        rep.mcs_p_R = std::min(1.0, running_R);
        rep.mcs_p_max = std::min(1.0, running_max);
        rep.rank_R = rank_R[a];
        rep.rank_max = rank_max[a];
        rep.v_R = v_R[a];
        rep.v_max = fs.t_i[a];
    }
    const auto& order = config.statistic == Statistic::TR ? order_R : order_max;
    for (std::size_t r : order) result.survivors.push_back(fs.models[r]);
    return result;
}

}  // namespace varmcs::mcs
