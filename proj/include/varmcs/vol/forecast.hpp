#pragma once

#include "varmcs/vol/garch.hpp"
#include "varmcs/vol/gas.hpp"

#include <string>

namespace varmcs::vol {

enum class ForecastLaw {
    Gaussian,       // location + sqrt(scale2) z
    UnitVarianceT,  // scale2 is the variance; innovation is a unit-variance Student-t
    ScaledT,        // scale2 is phi^2 of a location-scale Student-t
};

/// One-step-ahead conditional distribution of y_{T+1}.
struct ConditionalForecast {
    double location = 0.0;
    double scale2 = 1.0;
    double shape = 0.0;  // degrees of freedom for the Student-t laws
    ForecastLaw law = ForecastLaw::Gaussian;
};

ConditionalForecast one_step_forecast(const FittedGarch& model);
ConditionalForecast one_step_forecast(const FittedGas& model);

/// tau-quantile of the forecast distribution. Throws InputError unless 0 < tau < 1.
double var_from_forecast(const ConditionalForecast& forecast, double tau);

template <typename Model>
double var_from_model(const Model& model, double tau) {
    return var_from_forecast(one_step_forecast(model), tau);
}

/// Flat "name = value" text: a `model` line, one line per parameter, then
/// loglik, n_obs and spec_hash (a hash of the model line).
std::string export_parameters(const FittedGarch& model);
std::string export_parameters(const FittedGas& model);

std::string spec_label(const GarchSpec& spec);
std::string spec_label(const GasSpec& spec);

}  // namespace varmcs::vol
