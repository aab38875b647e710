#pragma once

#include "varmcs/common/random.hpp"
#include "varmcs/vol/fit_options.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace varmcs::vol {

enum class GasDist { Gaussian, StudentT };

/// Scaling matrix I^{-a}: identity (a=0), inverse square root (a=1/2), inverse (a=1).
enum class Scaling { Identity, InverseSqrtFisher, InverseFisher };

double scaling_exponent(Scaling scaling);
/// Only 0, 0.5 and 1 are accepted.
Scaling scaling_from_exponent(double a);

struct GasSpec {
    GasDist dist = GasDist::Gaussian;
    Scaling scaling = Scaling::InverseFisher;
    /// Student-t only: keep nu constant and scale the (mu, phi^2) score by their own
    /// Fisher block instead of the full (mu, phi^2, nu) matrix.
    bool static_shape = false;
};

/// Gaussian: (mu, sigma^2, unused). Student-t: (mu, phi^2, nu).
using GasVector = std::array<double, 3>;
using GasMatrix = std::array<GasVector, 3>;

std::size_t gas_dimension(const GasSpec& spec);

/// Diagonal score-driven dynamics in mapped coordinates
/// (mu, log sigma^2) or (mu, log phi^2, log nu):
///   z~_{t+1} = omega + alpha * s~_t + beta * z~_t   (element-wise)
struct GasParams {
    GasVector omega{};
    GasVector alpha{};
    GasVector beta{};
};

void validate(const GasSpec& spec, const GasParams& params);

double gas_log_density(const GasSpec& spec, const GasVector& zeta, double y);

/// Gradient of the log density with respect to the natural parameters.
GasVector gas_score(const GasSpec& spec, const GasVector& zeta, double y);

/// Fisher information with respect to the natural parameters.
GasMatrix gas_fisher(const GasSpec& spec, const GasVector& zeta);

/// Scaled score in mapped coordinates: mdot * I^{-a} * score, where mdot holds the
/// derivatives of the inverse map (1, 1/sigma^2) or (1, 1/phi^2, 1/nu).
/// Throws NumericalError when the Fisher matrix is singular.
GasVector gas_score_scale(const GasSpec& spec, const GasVector& zeta, double y);

GasVector to_natural(const GasSpec& spec, const GasVector& mapped);
GasVector to_mapped(const GasSpec& spec, const GasVector& natural);

/// Natural-space state path; `state[t]` is the conditional parameter vector of y_t.
struct GasFilter {
    std::vector<GasVector> state;
    GasVector next{};
};

/// Starts from the unconditional mapped state omega/(1-beta) unless an initial
/// mapped state is given. Throws NumericalError with the time index on non-finite states.
GasFilter gas_filter(const GasSpec& spec, const GasParams& params, std::span<const double> y,
                     std::optional<GasVector> initial_mapped = std::nullopt);

double gas_loglik(const GasSpec& spec, const GasParams& params, std::span<const double> y);

struct GasFitConstraints {
    bool fix_alpha_zero = false;  // constant-parameter model
};

struct FittedGas {
    GasSpec spec;
    GasParams params;
    double loglik = 0.0;
    std::size_t n_obs = 0;
    GasFilter path;
    FitDiagnostics diagnostics;
};

GasParams initial_params(const GasSpec& spec, std::span<const double> y);

/// A feasible warm start replaces the moment-based start 0 and centres the jittered ones.
FittedGas fit_gas(const GasSpec& spec, std::span<const double> y, const FitOptions& options = {},
                  const GasFitConstraints& constraints = {}, const std::optional<GasParams>& warm_start = std::nullopt);

std::vector<std::pair<std::string, double>> named_parameters(const GasSpec& spec, const GasParams& params);

/// Draws n observations from the model, starting at the unconditional mapped state.
std::vector<double> simulate_gas(const GasSpec& spec, const GasParams& params, std::size_t n, Rng& rng);

}  // namespace varmcs::vol
