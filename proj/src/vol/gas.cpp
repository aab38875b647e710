#include "varmcs/vol/gas.hpp"

#include "varmcs/common/errors.hpp"
#include "varmcs/vol/distribution.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace varmcs::vol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxMapped = 700.0;

// h1 = psi'(nu/2)/2 - psi'((nu+1)/2)/2 - (nu+5)/(nu(nu+3)(nu+1)).
// The direct form cancels badly for large nu; use the asymptotic series in 1/nu there.
double shape_information_h1(double nu) {
    if (nu >= 100.0) {
        const double x = 1.0 / nu;
        static constexpr double c[] = {7.0, -26.0, 79.0, -238.0, 727.0, -2202.0, 6559.0, -19526.0};
        double poly = 0.0;
        for (int k = 7; k >= 0; --k) poly = poly * x + c[k];
        return poly * x * x * x * x;
    }
    return 0.5 * boost::math::trigamma(0.5 * nu) - 0.5 * boost::math::trigamma(0.5 * (nu + 1.0)) -
           (nu + 5.0) / (nu * (nu + 3.0) * (nu + 1.0));
}

// Applies M^{-a} to (g1, g2) for a symmetric positive definite 2x2 matrix M.
std::array<double, 2> apply_block(double m11, double m12, double m22, double g1, double g2, Scaling scaling) {
    const double det = m11 * m22 - m12 * m12;
    if (!(det > 0.0) || !(m11 > 0.0) || !std::isfinite(det))
        throw NumericalError("singular Fisher information block");
    if (scaling == Scaling::InverseFisher) return {(m22 * g1 - m12 * g2) / det, (m11 * g2 - m12 * g1) / det};
    // sqrt(M) = (M + sI)/t with s = sqrt(det), t = sqrt(trace + 2s); M^{-1/2} = t (M + sI)^{-1}.
    const double s = std::sqrt(det);
    const double t = std::sqrt(m11 + m22 + 2.0 * s);
    const double a11 = m11 + s;
    const double a22 = m22 + s;
    const double adet = a11 * a22 - m12 * m12;
    return {t * (a22 * g1 - m12 * g2) / adet, t * (a11 * g2 - m12 * g1) / adet};
}

double scale_scalar(double info, double g, Scaling scaling) {
    if (!(info > 0.0) || !std::isfinite(info)) throw NumericalError("singular Fisher information");
    return scaling == Scaling::InverseFisher ? g / info : g / std::sqrt(info);
}

bool shape_is_dynamic(const GasSpec& spec) { return spec.dist == GasDist::StudentT && !spec.static_shape; }

struct RunResult {
    std::optional<std::size_t> failed;
    double loglik = 0.0;
};

RunResult run_gas(const GasSpec& spec, const GasParams& params, std::span<const double> y,
                  std::optional<GasVector> initial_mapped, GasFilter* out) {
    const std::size_t d = gas_dimension(spec);
    GasVector mapped{};
    if (initial_mapped) {
        mapped = *initial_mapped;
    } else {
        for (std::size_t k = 0; k < d; ++k) mapped[k] = params.omega[k] / (1.0 - params.beta[k]);
    }
    if (out) out->state.resize(y.size());
    RunResult result;
    for (std::size_t t = 0; t <= y.size(); ++t) {
        for (std::size_t k = 0; k < d; ++k) {
            if (!std::isfinite(mapped[k]) || (k > 0 && std::abs(mapped[k]) > kMaxMapped)) {
                result.failed = t;
                return result;
            }
        }
        const GasVector zeta = to_natural(spec, mapped);
        if (t == y.size()) {
            if (out) out->next = zeta;
            break;
        }
        if (out) out->state[t] = zeta;
        result.loglik += gas_log_density(spec, zeta, y[t]);
        GasVector s{};
        try {
            s = gas_score_scale(spec, zeta, y[t]);
        } catch (const std::exception&) {  // singular Fisher matrix or special-function overflow
            result.failed = t;
            return result;
        }
        for (std::size_t k = 0; k < d; ++k) mapped[k] = params.omega[k] + params.alpha[k] * s[k] + params.beta[k] * mapped[k];
    }
    if (!std::isfinite(result.loglik)) result.failed = y.size() ? y.size() - 1 : 0;
    return result;
}

}  // namespace

double scaling_exponent(Scaling scaling) {
    switch (scaling) {
        case Scaling::Identity: return 0.0;
        case Scaling::InverseSqrtFisher: return 0.5;
        case Scaling::InverseFisher: return 1.0;
    }
    return 1.0;
}

Scaling scaling_from_exponent(double a) {
    if (a == 0.0) return Scaling::Identity;
    if (a == 0.5) return Scaling::InverseSqrtFisher;
    if (a == 1.0) return Scaling::InverseFisher;
    throw InputError("GAS scaling exponent must be 0, 0.5 or 1");
}

std::size_t gas_dimension(const GasSpec& spec) { return spec.dist == GasDist::Gaussian ? 2 : 3; }

void validate(const GasSpec& spec, const GasParams& params) {
    const std::size_t d = gas_dimension(spec);
    for (std::size_t k = 0; k < d; ++k) {
        if (!std::isfinite(params.omega[k]) || !std::isfinite(params.alpha[k]) || !std::isfinite(params.beta[k]))
            throw InputError("GAS parameters must be finite");
        if (!(std::abs(params.beta[k]) < 1.0)) throw InputError("GAS requires |beta_k| < 1 for every component");
    }
    if (spec.dist == GasDist::StudentT && spec.static_shape && params.alpha[2] != 0.0)
        throw InputError("GAS-T with a static shape needs alpha_nu = 0");
}

double gas_log_density(const GasSpec& spec, const GasVector& zeta, double y) {
    if (spec.dist == GasDist::Gaussian) return gaussian_log_density(y, zeta[0], zeta[1]);
    return student_t_log_density(y, zeta[0], zeta[1], zeta[2]);
}

GasVector gas_score(const GasSpec& spec, const GasVector& zeta, double y) {
    const double e = y - zeta[0];
    if (spec.dist == GasDist::Gaussian) {
        const double s2 = zeta[1];
        return {e / s2, -0.5 / s2 * (1.0 - e * e / s2), 0.0};
    }
    const double phi2 = zeta[1];
    const double nu = zeta[2];
    const double e2 = e * e;
    const double denom = nu * phi2 + e2;
    const double d_mu = (nu + 1.0) * e / denom;
    const double d_phi2 = -0.5 / phi2 + (nu + 1.0) * e2 / (2.0 * phi2 * denom);
    const double d_nu = 0.5 * boost::math::digamma(0.5 * (nu + 1.0)) - 0.5 * boost::math::digamma(0.5 * nu) -
                        0.5 / nu - 0.5 * std::log1p(e2 / (nu * phi2)) + (nu + 1.0) * e2 / (2.0 * nu * denom);
    return {d_mu, d_phi2, d_nu};
}

GasMatrix gas_fisher(const GasSpec& spec, const GasVector& zeta) {
    GasMatrix m{};
    if (spec.dist == GasDist::Gaussian) {
        const double s2 = zeta[1];
        m[0][0] = 1.0 / s2;
        m[1][1] = 1.0 / (2.0 * s2 * s2);
        return m;
    }
    const double phi2 = zeta[1];
    const double nu = zeta[2];
    m[0][0] = (nu + 1.0) / (phi2 * (nu + 3.0));
    m[1][1] = nu / (2.0 * phi2 * phi2 * (nu + 3.0));
    m[1][2] = m[2][1] = -1.0 / (phi2 * (nu + 1.0) * (nu + 3.0));
    m[2][2] = 0.5 * shape_information_h1(nu);
    return m;
}

GasVector gas_score_scale(const GasSpec& spec, const GasVector& zeta, double y) {
    const GasVector g = gas_score(spec, zeta, y);
    GasVector scaled = g;
    if (spec.scaling != Scaling::Identity) {
        const GasMatrix info = gas_fisher(spec, zeta);
        scaled[0] = scale_scalar(info[0][0], g[0], spec.scaling);
        if (shape_is_dynamic(spec)) {
            const auto block = apply_block(info[1][1], info[1][2], info[2][2], g[1], g[2], spec.scaling);
            scaled[1] = block[0];
            scaled[2] = block[1];
        } else {
            scaled[1] = scale_scalar(info[1][1], g[1], spec.scaling);
        }
    }
    // Inverse-map derivatives: d(log x)/dx = 1/x.
    scaled[1] /= zeta[1];
    scaled[2] = shape_is_dynamic(spec) ? scaled[2] / zeta[2] : 0.0;
    return scaled;
}

GasVector to_natural(const GasSpec& spec, const GasVector& mapped) {
    GasVector z{mapped[0], std::exp(mapped[1]), 0.0};
    if (spec.dist == GasDist::StudentT) z[2] = std::exp(mapped[2]);
    return z;
}

GasVector to_mapped(const GasSpec& spec, const GasVector& natural) {
    GasVector m{natural[0], std::log(natural[1]), 0.0};
    if (spec.dist == GasDist::StudentT) m[2] = std::log(natural[2]);
    return m;
}

GasFilter gas_filter(const GasSpec& spec, const GasParams& params, std::span<const double> y,
                     std::optional<GasVector> initial_mapped) {
    validate(spec, params);
    if (y.empty()) throw InputError("GAS filter needs at least one observation");
    GasFilter out;
    const auto result = run_gas(spec, params, y, initial_mapped, &out);
    if (result.failed) throw NumericalError("GAS state left the admissible region", *result.failed);
    return out;
}

double gas_loglik(const GasSpec& spec, const GasParams& params, std::span<const double> y) {
    validate(spec, params);
    const auto result = run_gas(spec, params, y, std::nullopt, nullptr);
    if (result.failed) throw NumericalError("GAS state left the admissible region", *result.failed);
    return result.loglik;
}

GasParams initial_params(const GasSpec& spec, std::span<const double> y) {
    if (y.empty()) throw InputError("cannot initialize from an empty series");
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double s2 = 0.0;
    for (double v : y) s2 += (v - mean) * (v - mean);
    s2 = std::max(s2 / n, 1e-8);

    GasParams par;
    par.omega[0] = mean;
    const double nu0 = 8.0;
    const double scale2 = spec.dist == GasDist::StudentT ? s2 * (nu0 - 2.0) / nu0 : s2;
    par.beta[1] = 0.95;
    par.omega[1] = std::log(scale2) * (1.0 - par.beta[1]);
    // Step size of the variance score differs by a scale factor across the three scalings.
    double factor = 1.0;
    if (spec.scaling == Scaling::InverseSqrtFisher) factor = std::sqrt(2.0) * scale2;
    if (spec.scaling == Scaling::Identity) factor = 2.0 * scale2 * scale2;
    par.alpha[1] = 0.05 * factor;
    if (spec.dist == GasDist::StudentT) {
        if (spec.static_shape) {
            par.omega[2] = std::log(nu0);
        } else {
            par.beta[2] = 0.9;
            par.omega[2] = std::log(nu0) * (1.0 - par.beta[2]);
        }
    }
    return par;
}

namespace {

struct GasCodec {
    GasSpec spec;
    GasFitConstraints constraints;

    [[nodiscard]] bool dynamic(std::size_t k) const { return k < 2 || shape_is_dynamic(spec); }

    [[nodiscard]] std::vector<double> encode(const GasParams& par) const {
        std::vector<double> theta;
        for (std::size_t k = 0; k < gas_dimension(spec); ++k) {
            theta.push_back(par.omega[k]);
            if (!dynamic(k)) continue;
            if (!constraints.fix_alpha_zero) theta.push_back(par.alpha[k]);
            theta.push_back(std::atanh(std::clamp(par.beta[k], -1.0 + 1e-12, 1.0 - 1e-12)));
        }
        return theta;
    }

    [[nodiscard]] GasParams decode(std::span<const double> theta) const {
        GasParams par;
        std::size_t i = 0;
        for (std::size_t k = 0; k < gas_dimension(spec); ++k) {
            par.omega[k] = theta[i++];
            if (!dynamic(k)) continue;
            if (!constraints.fix_alpha_zero) par.alpha[k] = theta[i++];
            par.beta[k] = std::tanh(theta[i++]);
        }
        return par;
    }
};

}  // namespace

FittedGas fit_gas(const GasSpec& spec, std::span<const double> y, const FitOptions& options,
                  const GasFitConstraints& constraints, const std::optional<GasParams>& warm_start) {
    const std::string name = spec.dist == GasDist::Gaussian ? "GAS-N" : "GAS-T";
    if (y.size() < 10) throw InputError(name + ": not enough observations to fit");
    if (y.size() < 250) spdlog::warn("{}: fitting on {} observations (below the recommended 250)", name, y.size());
    if (options.starts < 1) throw InputError("at least one optimizer start is required");

    const GasCodec codec{spec, constraints};
    const double n = static_cast<double>(y.size());
    auto objective = [&](std::span<const double> theta) {
        const GasParams par = codec.decode(theta);
        for (std::size_t k = 0; k < gas_dimension(spec); ++k)
            if (!(std::abs(par.beta[k]) < 1.0)) return kInf;
        const auto result = run_gas(spec, par, y, std::nullopt, nullptr);
        if (result.failed) return kInf;
        return -result.loglik / n;
    };

    GasParams start_params = initial_params(spec, y);
    if (constraints.fix_alpha_zero) start_params.alpha = {};
    auto theta0 = codec.encode(start_params);
    if (warm_start) {
        GasParams warm = *warm_start;
        if (constraints.fix_alpha_zero) warm.alpha = {};
        const auto encoded = codec.encode(warm);
        if (std::isfinite(objective(encoded))) theta0 = encoded;
    }

    FitDiagnostics diag;
    optim::MinimizeResult best;
    best.value = kInf;
    for (int s = 0; s < options.starts; ++s) {
        auto start = theta0;
        if (s > 0) {
            Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(s)));
            std::normal_distribution<double> jitter(0.0, options.jitter);
            for (auto& v : start) v += jitter(rng);
        }
        ++diag.starts_tried;
        if (!std::isfinite(objective(start))) continue;
        ++diag.starts_feasible;
        auto result = optim::minimize_bfgs(objective, start, options.bfgs);
        if (result.converged) ++diag.starts_converged;
        if (result.value < best.value) {
            best = std::move(result);
            diag.best_start = s;
        }
    }
    if (!std::isfinite(best.value)) throw NumericalError(name + ": no optimizer start produced a finite likelihood");
    diag.converged = best.converged;
    if (!best.converged) {
        diag.message = "best start stopped before the gradient tolerance was met";
        spdlog::warn("{}: {}", name, diag.message);
    }

    FittedGas fit;
    fit.spec = spec;
    fit.params = codec.decode(best.x);
    fit.n_obs = y.size();
    fit.path = gas_filter(spec, fit.params, y);
    fit.loglik = gas_loglik(spec, fit.params, y);
    fit.diagnostics = diag;
    return fit;
}

std::vector<std::pair<std::string, double>> named_parameters(const GasSpec& spec, const GasParams& params) {
    static constexpr const char* gaussian_names[] = {"mu", "sigma2"};
    static constexpr const char* t_names[] = {"mu", "phi2", "nu"};
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t k = 0; k < gas_dimension(spec); ++k) {
        const std::string label = spec.dist == GasDist::Gaussian ? gaussian_names[k] : t_names[k];
        out.emplace_back("omega_" + label, params.omega[k]);
        out.emplace_back("alpha_" + label, params.alpha[k]);
        out.emplace_back("beta_" + label, params.beta[k]);
    }
    return out;
}

std::vector<double> simulate_gas(const GasSpec& spec, const GasParams& params, std::size_t n, Rng& rng) {
    validate(spec, params);
    const std::size_t d = gas_dimension(spec);
    GasVector mapped{};
    for (std::size_t k = 0; k < d; ++k) mapped[k] = params.omega[k] / (1.0 - params.beta[k]);
    std::normal_distribution<double> normal;
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        const GasVector zeta = to_natural(spec, mapped);
        if (spec.dist == GasDist::Gaussian) {
            y[t] = zeta[0] + std::sqrt(zeta[1]) * normal(rng);
        } else {
            std::student_t_distribution<double> student(zeta[2]);
            y[t] = zeta[0] + std::sqrt(zeta[1]) * student(rng);
        }
        const GasVector s = gas_score_scale(spec, zeta, y[t]);
        for (std::size_t k = 0; k < d; ++k) mapped[k] = params.omega[k] + params.alpha[k] * s[k] + params.beta[k] * mapped[k];
        for (std::size_t k = 0; k < d; ++k)
            if (!std::isfinite(mapped[k])) throw NumericalError("simulated GAS state diverged", t);
    }
    return y;
}

}  // namespace varmcs::vol
