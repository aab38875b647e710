#include "varmcs/vol/distribution.hpp"

#include "varmcs/common/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <numbers>

namespace varmcs::vol {

namespace {

void check_nu(const InnovationDist& dist) {
    if (dist.kind == Distribution::StudentT && !(dist.nu > 2.0))
        throw InputError("Student-t innovations need nu > 2, got " + std::to_string(dist.nu));
}

// log Gamma((nu+1)/2) - log Gamma(nu/2), stable for large nu.
double log_gamma_half_ratio(double nu) {
    return -std::log(boost::math::tgamma_delta_ratio(nu / 2.0, 0.5));
}

}  // namespace

double gaussian_log_density(double y, double mu, double sigma2) {
    const double e = y - mu;
    return -0.5 * (std::log(2.0 * std::numbers::pi) + std::log(sigma2) + e * e / sigma2);
}

double student_t_log_density(double y, double mu, double phi2, double nu) {
    const double e = y - mu;
    return log_gamma_half_ratio(nu) - 0.5 * std::log(std::numbers::pi * nu * phi2) -
           0.5 * (nu + 1.0) * std::log1p(e * e / (nu * phi2));
}

double standardized_log_density(const InnovationDist& dist, double z) {
    if (dist.kind == Distribution::Gaussian) return -0.5 * (std::log(2.0 * std::numbers::pi) + z * z);
    check_nu(dist);
    const double nu = dist.nu;
    return log_gamma_half_ratio(nu) - 0.5 * std::log(std::numbers::pi * (nu - 2.0)) -
           0.5 * (nu + 1.0) * std::log1p(z * z / (nu - 2.0));
}

double standardized_quantile(const InnovationDist& dist, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InputError("quantile level must lie in (0,1)");
    if (dist.kind == Distribution::Gaussian) return boost::math::quantile(boost::math::normal(), level);
    check_nu(dist);
    const double t = boost::math::quantile(boost::math::students_t(dist.nu), level);
    return t * std::sqrt((dist.nu - 2.0) / dist.nu);
}

double absolute_moment(const InnovationDist& dist, double delta) {
    if (!(delta >= 0.0)) throw InputError("moment order must be non-negative");
    if (delta == 0.0) return 1.0;
    if (dist.kind == Distribution::StudentT) {
        check_nu(dist);
        if (!(dist.nu > delta))
            throw InputError("E|z|^delta is infinite for Student-t with nu <= delta");
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    auto integrand = [&](double z) {
        if (z == 0.0) return 0.0;
        return std::exp(delta * std::log(z) + standardized_log_density(dist, z));
    };
    return 2.0 * integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
}

double asymmetric_power_moment(const InnovationDist& dist, double gamma, double delta) {
    if (!(gamma >= -1.0 && gamma <= 1.0))
        throw InputError("asymmetry gamma must lie in [-1,1]");
    // Symmetric density: half the mass sees (1-gamma)|z|, the other half (1+gamma)|z|.
    const double half = 0.5 * absolute_moment(dist, delta);
    return (std::pow(1.0 - gamma, delta) + std::pow(1.0 + gamma, delta)) * half;
}

double expected_abs(const InnovationDist& dist) {
    if (dist.kind == Distribution::Gaussian) return std::sqrt(2.0 / std::numbers::pi);
    check_nu(dist);
    const double nu = dist.nu;
    return 2.0 * std::sqrt(nu - 2.0) * std::exp(log_gamma_half_ratio(nu)) /
           (std::sqrt(std::numbers::pi) * (nu - 1.0));
}

}  // namespace varmcs::vol
