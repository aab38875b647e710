#pragma once

#include "varmcs/optim/minimize.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace varmcs::caviar {

enum class Variant { SymmetricAbsValue, AsymmetricSlope, IndirectGarch, Adaptive };

std::string_view variant_name(Variant variant);  // SAV, AS, IG, ADAPT
/// Accepts the short names above and the long enum names, case-insensitively.
Variant parse_variant(std::string_view name);

struct CaviarSpec {
    Variant variant = Variant::SymmetricAbsValue;
    double tau = 0.05;
    double G = 10.0;  // Adaptive only
};

/// beta has 3 entries (SAV, IG), 4 (AS) or 1 (Adaptive).
struct CaviarParams {
    std::vector<double> beta;
};

std::size_t parameter_count(Variant variant);

/// Throws InputError for bad tau/G, wrong arity, or an IG radicand that can turn negative.
void validate(const CaviarSpec& spec, const CaviarParams& params);

/// SAV, AS and IG evolve a positive magnitude q_t,
///   SAV: q_t = b1 + b2 q_{t-1} + b3 |y_{t-1}|
///   AS:  q_t = b1 + b2 q_{t-1} + b3 max(y_{t-1},0) + b4 max(-y_{t-1},0)
///   IG:  q_t = sqrt(b1 + b2 q_{t-1}^2 + b3 y_{t-1}^2)
/// and report f_t = -q_t when tau < 0.5 (f_t = q_t otherwise). Adaptive evolves f_t directly:
///   f_t = f_{t-1} + b1 / (1 + exp(G (y_{t-1} - f_{t-1}))).
struct QuantilePath {
    std::vector<double> quantile;  // f_t for each observation
    double next = 0.0;             // f_{T+1}
};

/// Reported quantile at t=1: the empirical tau-quantile of the first 10% of the sample.
double initial_quantile(std::span<const double> y, double tau);

/// `initial` overrides f_1 (in reported units). Throws NumericalError with the time
/// index on a non-finite state.
QuantilePath caviar_filter(const CaviarSpec& spec, const CaviarParams& params, std::span<const double> y,
                           std::optional<double> initial = std::nullopt);

/// sum_t rho_tau(y_t - f_t) with rho_tau(u) = u (tau - 1(u < 0)).
double tick_loss(std::span<const double> y, std::span<const double> quantile, double tau);

struct CaviarFitOptions {
    int random_starts = 10000;
    int polished = 10;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    optim::NelderMeadOptions nelder_mead;
    /// Coefficients held at a given value, keyed by 0-based position in beta.
    std::map<std::size_t, double> fixed;
    /// Extra candidate (e.g. the previous estimate in a rolling window); always polished.
    std::optional<CaviarParams> warm_start;
};

struct CaviarFit {
    CaviarSpec spec;
    CaviarParams params;
    double loss = 0.0;
    QuantilePath path;
    int feasible_starts = 0;
};

/// Random uniform starts, the best `polished` refined by Nelder-Mead, with |b2| < 1
/// for SAV, AS and IG. The result has the smallest tick loss of every evaluated point.
/// Throws NumericalError if no start is feasible.
CaviarFit caviar_fit(const CaviarSpec& spec, std::span<const double> y, const CaviarFitOptions& options = {});

/// One recursion step past the end of y.
double caviar_forecast(const CaviarSpec& spec, const CaviarParams& params, std::span<const double> y,
                       std::optional<double> initial = std::nullopt);

std::vector<std::pair<std::string, double>> named_parameters(const CaviarSpec& spec, const CaviarParams& params);

/// Flat "name = value" export in the same layout as the volatility models.
std::string export_parameters(const CaviarFit& fit, std::size_t n_obs);

}  // namespace varmcs::caviar
