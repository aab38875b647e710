#pragma once

#include "varmcs/risk/rolling.hpp"

#include <vector>

namespace varmcs::risk {

/// Equal-weight mean of the panel columns at every period.
std::vector<double> combine_var_average(const ForecastPanel& panel);

struct DynamicCombination {
    std::vector<double> var;                   // combined forecast per period
    std::vector<std::vector<double>> weights;  // weights[t][i], each row on the simplex
    std::vector<std::vector<double>> discounted_loss;  // L~ after observing period t
};

/// Softmax weights on discounted quantile losses:
///   L~_{i,t} = lambda L~_{i,t-1} + rho_tau(y_t - VaR_{i,t}),  w_{i,t+1} ∝ exp(-eta L~_{i,t}),
/// starting from uniform weights. eta = 0 gives the equal-weight mean exactly.
DynamicCombination combine_var_dynamic(const ForecastPanel& panel, double eta = 10.0, double lambda = 0.99);

}  // namespace varmcs::risk
