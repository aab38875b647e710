#pragma once

namespace varmcs::vol {

enum class Distribution { Gaussian, StudentT };

/// Innovation law of a GARCH-type model. For StudentT the innovation is
/// standardized to unit variance, which needs nu > 2.
struct InnovationDist {
    Distribution kind = Distribution::Gaussian;
    double nu = 0.0;  // ignored for Gaussian
};

/// Log density of the unit-variance standardized innovation at z.
double standardized_log_density(const InnovationDist& dist, double z);

/// Quantile of the unit-variance standardized innovation.
double standardized_quantile(const InnovationDist& dist, double level);

/// E|z|^delta for the standardized innovation, by numerical integration.
/// Throws InputError when the moment does not exist (StudentT with nu <= delta).
double absolute_moment(const InnovationDist& dist, double delta);

/// kappa = E(|z| - gamma z)^delta for a symmetric standardized innovation.
double asymmetric_power_moment(const InnovationDist& dist, double gamma, double delta);

/// E|z| in closed form (used by the EGARCH recursion on every evaluation).
double expected_abs(const InnovationDist& dist);

/// Log density of a location-scale Student-t with scale phi2 (not unit variance).
double student_t_log_density(double y, double mu, double phi2, double nu);

double gaussian_log_density(double y, double mu, double sigma2);

}  // namespace varmcs::vol
