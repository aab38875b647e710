#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace varmcs::loss {

enum class VarLossType { Normal, Differentiable };
enum class VolLoss { SE1, SE2, QLIKE, R2LOG, AE1, AE2 };
enum class LevelLoss { SE, AE };

constexpr double kDefaultSmoothness = 25.0;

/// Asymmetric quantile loss (tau - d_t)(y_t - VaR_t) with d_t = 1(y_t < VaR_t), or the
/// smooth version with d_t replaced by m(y,VaR) = 1 / (1 + exp(delta (y - VaR))).
std::vector<double> loss_var(std::span<const double> realized, std::span<const double> evaluated, double tau,
                             VarLossType type = VarLossType::Normal, double delta = kDefaultSmoothness);

/// Volatility losses on standard deviations (realized proxy vs forecast).
std::vector<double> loss_vol(std::span<const double> realized, std::span<const double> evaluated, VolLoss which);

std::vector<double> loss_level(std::span<const double> realized, std::span<const double> evaluated, LevelLoss which);

VolLoss parse_vol_loss(std::string_view name);
LevelLoss parse_level_loss(std::string_view name);
VarLossType parse_var_loss_type(std::string_view name);
std::string_view to_string(VolLoss which);

/// Which loss to apply when building a loss matrix.
struct LossKind {
    enum class Family { VaR, Vol, Level };
    Family family = Family::VaR;
    VarLossType var_type = VarLossType::Normal;
    double tau = 0.05;
    double delta = kDefaultSmoothness;
    VolLoss vol = VolLoss::QLIKE;
    LevelLoss level = LevelLoss::SE;
};

/// m models by n periods. Every entry finite, every row the same length.
struct LossMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t models() const noexcept { return rows.size(); }
    [[nodiscard]] std::size_t periods() const noexcept { return rows.empty() ? 0 : rows.front().size(); }
    /// Throws InputError naming the model and period of the first offending entry.
    void validate() const;
};

/// Row i applies `kind` to forecasts[i] against the realized series.
LossMatrix build_loss_matrix(std::span<const double> realized, const std::vector<std::string>& names,
                             const std::vector<std::vector<double>>& forecasts, const LossKind& kind);

/// CSV layout: header "model,t1,...,tn", then one row per model. The header is optional
/// on input; it is recognised by a first field equal to "model".
LossMatrix read_loss_csv(std::istream& in);
LossMatrix read_loss_csv(const std::filesystem::path& path);
void write_loss_csv(std::ostream& out, const LossMatrix& matrix);

}  // namespace varmcs::loss
