#pragma once

#include "varmcs/optim/minimize.hpp"

#include <cstdint>
#include <string>

namespace varmcs::vol {

/// Maximum-likelihood settings shared by the GARCH and GAS estimators.
struct FitOptions {
    int starts = 5;        // start 0 is the moment-based guess, the rest are jittered copies
    double jitter = 0.5;   // standard deviation of the jitter in unconstrained coordinates
    std::uint64_t seed = 1;
    optim::BfgsOptions bfgs;
};

struct FitDiagnostics {
    int starts_tried = 0;
    int starts_feasible = 0;
    int starts_converged = 0;
    int best_start = -1;
    bool converged = false;
    std::string message;
};

}  // namespace varmcs::vol
