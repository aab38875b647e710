#pragma once

#include "varmcs/loss/loss.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace varmcs::mcs {

enum class Statistic { TR, Tmax };

std::string_view to_string(Statistic statistic);
Statistic parse_statistic(std::string_view name);  // "TR" or "Tmax", case-insensitive

struct McsConfig {
    double alpha = 0.15;
    int B = 5000;
    Statistic statistic = Statistic::Tmax;
    std::optional<std::size_t> block_length;  // absent: AR(p) selection on the full set
    std::uint64_t seed = 1;
    unsigned workers = 1;

    /// Throws InputError unless 0 < alpha < 1, B >= 100 and block_length >= 1.
    void validate() const;
};

struct BlockLengthSelection {
    std::size_t length = 1;            // largest significant lag over all pairs, at least 1
    std::size_t max_significant = 0;   // largest count of significant lags in any pair
    std::size_t max_order = 0;         // AR order fitted to every pair
    std::size_t pairs_used = 0;        // pairs with a non-constant differential
};

/// Fits AR(p_max), p_max = min(10, floor(n^(1/3))), with intercept by least squares to
/// every pairwise loss differential. A lag is significant when |coef / s.e.| > 1.96.
/// Constant differentials are skipped. Requires n >= 30.
BlockLengthSelection select_block_length(const loss::LossMatrix& losses);

/// Moving-block bootstrap index sets shared by every model and pair.
/// Replicate b is the concatenation of ceil(n/p) blocks of length p with start points
/// uniform on [0, n-p], truncated to n.
class BootstrapIndices {
public:
    BootstrapIndices(std::size_t n, std::size_t B, std::size_t block_length, std::uint64_t seed);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t replicates() const noexcept { return starts_.size(); }
    [[nodiscard]] std::size_t block_length() const noexcept { return block_; }
    [[nodiscard]] std::span<const std::size_t> block_starts(std::size_t b) const { return starts_.at(b); }
    /// The n resampled time indices of replicate b (0-based).
    [[nodiscard]] std::vector<std::size_t> indices(std::size_t b) const;

private:
    std::size_t n_;
    std::size_t block_;
    std::vector<std::vector<std::size_t>> starts_;
};

/// Bootstrap means of every model, one row per replicate (B x m).
std::vector<std::vector<double>> replicate_means(const loss::LossMatrix& losses, const BootstrapIndices& indices,
                                                 unsigned workers = 1);

/// Studentized loss differentials on a model set.
struct EpaStatistics {
    std::vector<std::size_t> models;           // indices into the loss matrix
    std::vector<double> mean_loss;             // per model in `models`
    std::vector<std::vector<double>> d_ij;     // mean pairwise differentials
    std::vector<std::vector<double>> var_ij;   // bootstrap variances of d_ij
    std::vector<std::vector<double>> t_ij;     // antisymmetric; +-inf for a deterministic ordering
    std::vector<double> d_i;                   // mean of d_i. = (k/(k-1)) (mean_i - mean over set)
    std::vector<double> var_i;
    std::vector<double> t_i;
    double T_R = 0.0;                          // max |t_ij|
    double T_max = 0.0;                        // max t_i.
    double p_R = 1.0;                          // bootstrap p-values of the recentered statistics
    double p_max = 1.0;
};

/// Statistics and both bootstrap p-values on `models` (all models when empty).
EpaStatistics epa_statistics(const loss::LossMatrix& losses, const BootstrapIndices& indices,
                             std::span<const std::size_t> models = {}, unsigned workers = 1);

/// Same computation from precomputed replicate means (see replicate_means).
EpaStatistics epa_statistics(const std::vector<double>& means, const std::vector<std::vector<double>>& boot_means,
                             std::span<const std::size_t> models);

struct EpaTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    EpaStatistics details;
};

/// Equal predictive ability test on all models of the matrix.
EpaTestResult epa_test(const loss::LossMatrix& losses, const McsConfig& config);

/// Position (within stats.models) of the model to drop: the largest row-wise sup of t_ij
/// for TR, the largest t_i. for Tmax. Ties go to the smallest model index.
std::size_t eliminate_worst(const EpaStatistics& stats, Statistic statistic);

struct StepRecord {
    std::vector<std::size_t> models;  // set tested at this step
    double T_R = 0.0;
    double T_max = 0.0;
    double p_R = 1.0;
    double p_max = 1.0;
    std::optional<std::size_t> eliminated;  // model index, if the step rejected
};

struct ModelReport {
    std::string name;
    double mean_loss = 0.0;
    bool survivor = false;
    std::optional<std::size_t> eliminated_at;  // 0-based step
    double mcs_p_R = 1.0;                      // running-max MCS p-values
    double mcs_p_max = 1.0;
    int rank_R = 0;                            // survivors only, 1 = best
    int rank_max = 0;
    double v_R = 0.0;                          // max_j t_ij on the final set
    double v_max = 0.0;                        // t_i. on the final set
};

struct SsmResult {
    McsConfig config;
    std::size_t n = 0;
    std::size_t block_length = 1;
    std::optional<BlockLengthSelection> selection;  // set when the length was chosen automatically
    std::vector<ModelReport> models;                // in loss-matrix order
    std::vector<std::size_t> survivors;             // ascending rank of the configured statistic
    std::vector<std::size_t> elimination_order;
    std::vector<StepRecord> steps;
};

/// Sequential elimination until the EPA test accepts at level alpha or one model is left.
/// Requires m >= 2 and n >= 10.
SsmResult run_mcs(const loss::LossMatrix& losses, const McsConfig& config);

/// Table-2 layout for the survivors:
/// model,Rank_R,t_ij,p_value_R,Rank_max,t_i,p_value_max,Loss_x1e3
void write_ssm_csv(std::ostream& out, const SsmResult& result);

/// Structured report with configuration, per-model results and the elimination trace.
void write_ssm_json(std::ostream& out, const SsmResult& result);

}  // namespace varmcs::mcs
