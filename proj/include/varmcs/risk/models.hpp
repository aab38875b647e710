#pragma once

#include "varmcs/caviar/caviar.hpp"
#include "varmcs/vol/garch.hpp"
#include "varmcs/vol/gas.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace varmcs::risk {

/// CAViaR specs carry their own tau; the forecasting harness overrides it with the run's tau.
using ModelVariant = std::variant<vol::GarchSpec, vol::GasSpec, caviar::CaviarSpec>;

struct ModelSpec {
    std::string label;
    ModelVariant spec;
};

/// Labels:
///   <family>[(p,q)]-N|T   e.g. GARCH-N, GJRGARCH-T, APARCH(1,1)-T
///   GAS-N, GAS-T, GAS-T-static
///   CAViaR-SAV, CAViaR-AS, CAViaR-IG, CAViaR-ADAPT
/// Case-insensitive. The stored label is the canonical spelling.
ModelSpec parse_model(std::string_view label);

std::string canonical_label(const ModelVariant& spec);

/// The 22-model comparison set: eight GARCH(1,1) families with Gaussian and Student-t
/// innovations, GAS-N, GAS-T and the four CAViaR variants.
std::vector<ModelSpec> standard_model_set();

}  // namespace varmcs::risk
