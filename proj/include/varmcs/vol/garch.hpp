#pragma once

#include "varmcs/common/random.hpp"
#include "varmcs/vol/distribution.hpp"
#include "varmcs/vol/fit_options.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace varmcs::vol {

enum class GarchFamily { GARCH, IGARCH, EGARCH, APARCH, AVGARCH, GJRGARCH, TGARCH, NGARCH, CGARCH };

std::string_view family_name(GarchFamily family);
/// Case-insensitive; accepts AVARCH as an alias of AVGARCH and GJR for GJRGARCH.
GarchFamily parse_family(std::string_view name);

struct GarchSpec {
    GarchFamily family = GarchFamily::GARCH;
    int p = 1;  // ARCH (shock) lags
    int q = 1;  // GARCH (variance) lags
    Distribution dist = Distribution::Gaussian;
    bool include_mean = true;
};

/// Parameters of every family in one record; unused fields are ignored.
///
/// GARCH/IGARCH/GJRGARCH/AVGARCH/TGARCH/APARCH/NGARCH evolve h_t = sigma_t^delta:
///   h_t = omega + sum_i alpha_i (|e_{t-i}| - gamma_i e_{t-i})^delta + sum_j beta_j h_{t-j}
/// with delta fixed to 2 (GARCH, IGARCH, GJRGARCH) or 1 (AVGARCH, TGARCH) and
/// gamma fixed to 0 for GARCH, IGARCH, AVGARCH and NGARCH.
/// EGARCH evolves log sigma_t^2 and CGARCH adds the permanent component xi_t.
struct GarchParams {
    double mu = 0.0;
    double omega = 0.0;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> gamma;
    double delta = 2.0;
    double rho = 0.0;
    double eta = 0.0;
    double nu = 0.0;  // Student-t degrees of freedom
};

/// Power delta actually used by the family (fixed for the nested cases).
double family_delta(const GarchSpec& spec, const GarchParams& params);

/// Throws InputError if the parameters violate the family constraints.
void validate(const GarchSpec& spec, const GarchParams& params);

InnovationDist innovation(const GarchSpec& spec, const GarchParams& params);

/// Filtered conditional variances; `next_*` are the one-step-ahead values given the whole sample.
struct VarianceFilter {
    std::vector<double> sigma2;
    std::vector<double> xi;  // CGARCH permanent component, empty otherwise
    double next_sigma2 = 0.0;
    double next_xi = 0.0;
};

/// Runs the variance recursion on y with e_t = y_t - mu.
///
/// Pre-sample values are set from the window: lagged variances equal the mean
/// squared residual s2 (log s2 for EGARCH, and xi for CGARCH), and lagged shock terms
/// equal the window mean of the family's shock transform (zero for EGARCH's
/// standardized terms). `presample_variance` replaces s2 by a given value and the
/// lagged shock terms by v^(delta/2). Throws NumericalError with the time index
/// if a value stops being finite and positive.
VarianceFilter filter_variance(const GarchSpec& spec, const GarchParams& params, std::span<const double> y,
                               std::optional<double> presample_variance = std::nullopt);

/// sum_i alpha_i kappa_i + sum_j beta_j, with kappa_i = E(|z| - gamma_i z)^delta
/// (numerically integrated); sum beta_j for EGARCH; sum alpha + sum beta for CGARCH.
double persistence(const GarchSpec& spec, const GarchParams& params);

double garch_loglik(const GarchSpec& spec, const GarchParams& params, std::span<const double> y,
                    std::optional<double> presample_variance = std::nullopt);

struct FittedGarch {
    GarchSpec spec;
    GarchParams params;
    double loglik = 0.0;
    std::size_t n_obs = 0;
    VarianceFilter path;
    FitDiagnostics diagnostics;
};

/// Maximum likelihood with a multi-start quasi-Newton search over an unconstrained
/// reparameterization. Throws NumericalError only if no start is feasible.
/// A feasible warm start replaces the moment-based start 0 and centres the jittered ones.
FittedGarch fit_garch(const GarchSpec& spec, std::span<const double> y, const FitOptions& options = {},
                      const std::optional<GarchParams>& warm_start = std::nullopt);

/// Moment-based starting values.
GarchParams initial_params(const GarchSpec& spec, std::span<const double> y);

/// Draws n observations after `burn_in` discarded ones. Supports the families that
/// evolve sigma^delta (all but EGARCH and CGARCH); the recursion starts at the
/// unconditional level (or at omega for IGARCH).
std::vector<double> simulate_garch(const GarchSpec& spec, const GarchParams& params, std::size_t n, Rng& rng,
                                   std::size_t burn_in = 500);

/// Parameter names and values in a stable order, e.g. ("alpha1", 0.05).
std::vector<std::pair<std::string, double>> named_parameters(const GarchSpec& spec, const GarchParams& params);

/// Bijection between admissible parameters and R^k used by the estimator.
std::vector<double> encode(const GarchSpec& spec, const GarchParams& params);
/// Returns nullopt for points that map outside the admissible set (e.g. an infinite kappa).
std::optional<GarchParams> decode(const GarchSpec& spec, std::span<const double> theta);

}  // namespace varmcs::vol
