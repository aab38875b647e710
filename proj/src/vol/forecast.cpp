#include "varmcs/vol/forecast.hpp"

#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"
#include "varmcs/common/hash.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <sstream>

namespace varmcs::vol {

namespace {

std::string render(const std::string& label, const std::vector<std::pair<std::string, double>>& params,
                   double loglik, std::size_t n_obs) {
    std::ostringstream out;
    out << "model = " << label << '\n';
    for (const auto& [name, value] : params) out << name << " = " << format_double(value) << '\n';
    out << "loglik = " << format_double(loglik) << '\n';
    out << "n_obs = " << n_obs << '\n';
    out << "spec_hash = " << to_hex(fnv1a64(label)) << '\n';
    return out.str();
}

}  // namespace

ConditionalForecast one_step_forecast(const FittedGarch& model) {
    ConditionalForecast f;
    f.location = model.params.mu;
    f.scale2 = model.path.next_sigma2;
    if (model.spec.dist == Distribution::StudentT) {
        f.law = ForecastLaw::UnitVarianceT;
        f.shape = model.params.nu;
    }
    return f;
}

ConditionalForecast one_step_forecast(const FittedGas& model) {
    ConditionalForecast f;
    f.location = model.path.next[0];
    f.scale2 = model.path.next[1];
    if (model.spec.dist == GasDist::StudentT) {
        f.law = ForecastLaw::ScaledT;
        f.shape = model.path.next[2];
    }
    return f;
}

double var_from_forecast(const ConditionalForecast& forecast, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("VaR level tau must lie in (0,1)");
    if (!(forecast.scale2 > 0.0) || !std::isfinite(forecast.scale2))
        throw NumericalError("forecast scale must be positive and finite");
    const double scale = std::sqrt(forecast.scale2);
    switch (forecast.law) {
        case ForecastLaw::Gaussian:
            return forecast.location + scale * boost::math::quantile(boost::math::normal(), tau);
        case ForecastLaw::UnitVarianceT: {
            const double nu = forecast.shape;
            if (!(nu > 2.0)) throw InputError("unit-variance Student-t needs nu > 2");
            const double t = boost::math::quantile(boost::math::students_t(nu), tau);
            return forecast.location + scale * t * std::sqrt((nu - 2.0) / nu);
        }
        case ForecastLaw::ScaledT: {
            const double nu = forecast.shape;
            if (!(nu > 0.0) || !std::isfinite(nu)) throw NumericalError("Student-t shape must be positive");
            return forecast.location + scale * boost::math::quantile(boost::math::students_t(nu), tau);
        }
    }
    return forecast.location;
}

std::string spec_label(const GarchSpec& spec) {
    std::string label(family_name(spec.family));
    label += "(" + std::to_string(spec.p) + "," + std::to_string(spec.q) + ")";
    label += spec.dist == Distribution::Gaussian ? "-N" : "-T";
    if (!spec.include_mean) label += " zero-mean";
    return label;
}

std::string spec_label(const GasSpec& spec) {
    std::string label = spec.dist == GasDist::Gaussian ? "GAS-N" : "GAS-T";
    label += " a=" + format_double(scaling_exponent(spec.scaling));
    if (spec.static_shape) label += " static-shape";
    return label;
}

std::string export_parameters(const FittedGarch& model) {
    return render(spec_label(model.spec), named_parameters(model.spec, model.params), model.loglik, model.n_obs);
}

std::string export_parameters(const FittedGas& model) {
    return render(spec_label(model.spec), named_parameters(model.spec, model.params), model.loglik, model.n_obs);
}

}  // namespace varmcs::vol
