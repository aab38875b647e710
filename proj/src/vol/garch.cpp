#include "varmcs/vol/garch.hpp"

#include "varmcs/common/errors.hpp"
#include "varmcs/common/random.hpp"
#include "varmcs/vol/transforms.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace varmcs::vol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxLogVariance = 700.0;

bool is_power_family(GarchFamily f) {
    return f != GarchFamily::EGARCH && f != GarchFamily::CGARCH;
}

bool uses_gamma(GarchFamily f) {
    return f == GarchFamily::EGARCH || f == GarchFamily::APARCH || f == GarchFamily::GJRGARCH ||
           f == GarchFamily::TGARCH;
}

bool free_delta(GarchFamily f) { return f == GarchFamily::APARCH || f == GarchFamily::NGARCH; }

double gamma_at(const GarchSpec& spec, const GarchParams& params, std::size_t i) {
    if (!uses_gamma(spec.family) || params.gamma.empty()) return 0.0;
    return params.gamma[i];
}

// E|z|^delta in closed form; the estimator needs it on every evaluation.
double abs_moment_closed(const InnovationDist& dist, double delta) {
    if (delta == 2.0) return 1.0;
    if (dist.kind == Distribution::Gaussian) {
        return std::exp(0.5 * delta * std::numbers::ln2 + std::lgamma(0.5 * (delta + 1.0))) /
               std::sqrt(std::numbers::pi);
    }
    const double nu = dist.nu;
    if (!(nu > delta)) return kInf;
    return std::exp(0.5 * delta * std::log(nu - 2.0) + std::lgamma(0.5 * (delta + 1.0)) +
                    std::lgamma(0.5 * (nu - delta)) - std::lgamma(0.5 * nu)) /
           std::sqrt(std::numbers::pi);
}

double kappa_closed(const InnovationDist& dist, double gamma, double delta) {
    if (gamma == 0.0) return abs_moment_closed(dist, delta);
    return 0.5 * (std::pow(1.0 - gamma, delta) + std::pow(1.0 + gamma, delta)) *
           abs_moment_closed(dist, delta);
}

// Shock term of the power families for lag coefficient gamma.
double shock_term(GarchFamily f, double e, double gamma, double delta) {
    switch (f) {
        case GarchFamily::GARCH:
        case GarchFamily::IGARCH:
            return e * e;
        case GarchFamily::GJRGARCH: {
            const double u = std::abs(e) - gamma * e;
            return u * u;
        }
        case GarchFamily::AVGARCH:
            return std::abs(e);
        case GarchFamily::TGARCH:
            return std::abs(e) - gamma * e;
        case GarchFamily::NGARCH:
            return std::pow(std::abs(e), delta);
        case GarchFamily::APARCH:
            return std::pow(std::abs(e) - gamma * e, delta);
        default:
            return 0.0;
    }
}

// sigma^2 from h = sigma^delta.
double power_to_variance(double h, double delta) {
    if (delta == 2.0) return h;
    if (delta == 1.0) return h * h;
    return std::pow(h, 2.0 / delta);
}

double variance_to_power(double v, double delta) {
    if (delta == 2.0) return v;
    if (delta == 1.0) return std::sqrt(v);
    return std::pow(v, 0.5 * delta);
}

bool good(double v) { return std::isfinite(v) && v > 0.0; }

/// Runs the recursion without throwing. Returns the failing time index, if any.
std::optional<std::size_t> run_filter(const GarchSpec& spec, const GarchParams& params,
                                      std::span<const double> y, std::optional<double> presample,
                                      VarianceFilter& out) {
    const std::size_t n = y.size();
    const auto p = static_cast<std::size_t>(spec.p);
    const auto q = static_cast<std::size_t>(spec.q);
    std::vector<double> e(n);
    double s2 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        e[t] = y[t] - params.mu;
        s2 += e[t] * e[t];
    }
    s2 /= static_cast<double>(n);
    if (presample) s2 = *presample;
    if (!good(s2)) return std::size_t{0};

    out.sigma2.assign(n, 0.0);
    out.xi.clear();

    if (is_power_family(spec.family)) {
        const double delta = family_delta(spec, params);
        const double h_pre = variance_to_power(s2, delta);
        std::vector<double> g_pre(p, h_pre);
        if (!presample) {
            for (std::size_t i = 0; i < p; ++i) {
                const double gamma = gamma_at(spec, params, i);
                double acc = 0.0;
                for (std::size_t t = 0; t < n; ++t) acc += shock_term(spec.family, e[t], gamma, delta);
                g_pre[i] = acc / static_cast<double>(n);
            }
        }
        std::vector<double> h(n + 1);
        for (std::size_t t = 0; t <= n; ++t) {
            double value = params.omega;
            for (std::size_t i = 1; i <= p; ++i) {
                const double g = t >= i ? shock_term(spec.family, e[t - i], gamma_at(spec, params, i - 1), delta)
                                        : g_pre[i - 1];
                value += params.alpha[i - 1] * g;
            }
            for (std::size_t j = 1; j <= q; ++j) value += params.beta[j - 1] * (t >= j ? h[t - j] : h_pre);
            if (!good(value)) return t;
            h[t] = value;
            const double v = power_to_variance(value, delta);
            if (!good(v)) return t;
            if (t < n)
                out.sigma2[t] = v;
            else
                out.next_sigma2 = v;
        }
        return std::nullopt;
    }

    if (spec.family == GarchFamily::EGARCH) {
        const double mean_abs = expected_abs(innovation(spec, params));
        const double l_pre = std::log(s2);
        std::vector<double> l(n + 1);
        std::vector<double> w(n);
        for (std::size_t t = 0; t <= n; ++t) {
            double value = params.omega;
            for (std::size_t i = 1; i <= p; ++i) {
                if (t < i) continue;  // pre-sample standardized shocks contribute zero
                const double z = w[t - i];
                value += params.alpha[i - 1] * z + params.gamma[i - 1] * (std::abs(z) - mean_abs);
            }
            for (std::size_t j = 1; j <= q; ++j) value += params.beta[j - 1] * (t >= j ? l[t - j] : l_pre);
            if (!std::isfinite(value) || std::abs(value) > kMaxLogVariance) return t;
            l[t] = value;
            const double v = std::exp(value);
            if (t < n) {
                out.sigma2[t] = v;
                w[t] = e[t] / std::sqrt(v);
            } else {
                out.next_sigma2 = v;
            }
        }
        return std::nullopt;
    }

    // CGARCH
    out.xi.assign(n, 0.0);
    std::vector<double> sig(n + 1), xi(n + 1);
    auto e2_at = [&](std::size_t t, std::size_t lag) { return t >= lag ? e[t - lag] * e[t - lag] : s2; };
    auto sig_at = [&](std::size_t t, std::size_t lag) { return t >= lag ? sig[t - lag] : s2; };
    auto xi_at = [&](std::size_t t, std::size_t lag) { return t >= lag ? xi[t - lag] : s2; };
    for (std::size_t t = 0; t <= n; ++t) {
        const double x = params.omega + params.rho * xi_at(t, 1) + params.eta * (e2_at(t, 1) - sig_at(t, 1));
        double v = x;
        for (std::size_t i = 1; i <= p; ++i) v += params.alpha[i - 1] * (e2_at(t, i) - xi_at(t, i));
        for (std::size_t j = 1; j <= q; ++j) v += params.beta[j - 1] * (sig_at(t, j) - xi_at(t, j));
        if (!good(x) || !good(v)) return t;
        xi[t] = x;
        sig[t] = v;
        if (t < n) {
            out.sigma2[t] = v;
            out.xi[t] = x;
        } else {
            out.next_sigma2 = v;
            out.next_xi = x;
        }
    }
    return std::nullopt;
}

double loglik_from_path(const GarchSpec& spec, const GarchParams& params, std::span<const double> y,
                        const std::vector<double>& sigma2) {
    double total = 0.0;
    if (spec.dist == Distribution::Gaussian) {
        const double c = std::log(2.0 * std::numbers::pi);
        for (std::size_t t = 0; t < y.size(); ++t) {
            const double e = y[t] - params.mu;
            total += -0.5 * (c + std::log(sigma2[t]) + e * e / sigma2[t]);
        }
        return total;
    }
    const double nu = params.nu;
    const double c = standardized_log_density({Distribution::StudentT, nu}, 0.0);
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double e = y[t] - params.mu;
        const double z2 = e * e / sigma2[t];
        total += c - 0.5 * (nu + 1.0) * std::log1p(z2 / (nu - 2.0)) - 0.5 * std::log(sigma2[t]);
    }
    return total;
}

// Stick-breaking: K components with sum < 1 from K unconstrained coordinates.
void stick_encode(std::span<const double> comps, std::vector<double>& theta) {
    double remaining = 1.0;
    for (double c : comps) {
        const double v = std::clamp(c / remaining, 1e-10, 1.0 - 1e-10);
        theta.push_back(logit(v));
        remaining *= 1.0 - v;
    }
}

std::vector<double> stick_decode(std::span<const double> theta) {
    std::vector<double> comps;
    comps.reserve(theta.size());
    double remaining = 1.0;
    for (double u : theta) {
        const double v = logistic(u);
        comps.push_back(v * remaining);
        remaining *= 1.0 - v;
    }
    return comps;
}

constexpr double kNuLow = 2.05;
constexpr double kNuSpan = 197.95;
constexpr double kDeltaMax = 4.0;

}  // namespace

std::string_view family_name(GarchFamily family) {
    switch (family) {
        case GarchFamily::GARCH: return "GARCH";
        case GarchFamily::IGARCH: return "IGARCH";
        case GarchFamily::EGARCH: return "EGARCH";
        case GarchFamily::APARCH: return "APARCH";
        case GarchFamily::AVGARCH: return "AVGARCH";
        case GarchFamily::GJRGARCH: return "GJRGARCH";
        case GarchFamily::TGARCH: return "TGARCH";
        case GarchFamily::NGARCH: return "NGARCH";
        case GarchFamily::CGARCH: return "CGARCH";
    }
    return "?";
}

GarchFamily parse_family(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "AVARCH") return GarchFamily::AVGARCH;
    if (upper == "GJR") return GarchFamily::GJRGARCH;
    for (auto f : {GarchFamily::GARCH, GarchFamily::IGARCH, GarchFamily::EGARCH, GarchFamily::APARCH,
                   GarchFamily::AVGARCH, GarchFamily::GJRGARCH, GarchFamily::TGARCH, GarchFamily::NGARCH,
                   GarchFamily::CGARCH}) {
        if (upper == family_name(f)) return f;
    }
    throw InputError("unknown GARCH family '" + std::string(name) + "'");
}

double family_delta(const GarchSpec& spec, const GarchParams& params) {
    switch (spec.family) {
        case GarchFamily::AVGARCH:
        case GarchFamily::TGARCH:
            return 1.0;
        case GarchFamily::APARCH:
        case GarchFamily::NGARCH:
            return params.delta;
        default:
            return 2.0;
    }
}

InnovationDist innovation(const GarchSpec& spec, const GarchParams& params) {
    if (spec.dist == Distribution::Gaussian) return {};
    return {Distribution::StudentT, params.nu};
}

void validate(const GarchSpec& spec, const GarchParams& params) {
    if (spec.p < 1 || spec.q < 1) throw InputError("GARCH orders p and q must be at least 1");
    const auto p = static_cast<std::size_t>(spec.p);
    const auto q = static_cast<std::size_t>(spec.q);
    const std::string name(family_name(spec.family));
    if (params.alpha.size() != p || params.beta.size() != q)
        throw InputError(name + ": expected " + std::to_string(p) + " alpha and " + std::to_string(q) +
                         " beta coefficients");
    if (uses_gamma(spec.family) && params.gamma.size() != p)
        throw InputError(name + ": expected " + std::to_string(p) + " gamma coefficients");
    if (!uses_gamma(spec.family) &&
        std::any_of(params.gamma.begin(), params.gamma.end(), [](double g) { return g != 0.0; }))
        throw InputError(name + " has no asymmetry coefficients");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(params.mu) || !finite(params.omega) || !std::all_of(params.alpha.begin(), params.alpha.end(), finite) ||
        !std::all_of(params.beta.begin(), params.beta.end(), finite) ||
        !std::all_of(params.gamma.begin(), params.gamma.end(), finite))
        throw InputError(name + ": parameters must be finite");
    if (spec.dist == Distribution::StudentT && !(params.nu > 2.0))
        throw InputError(name + ": Student-t innovations need nu > 2");
    if (!spec.include_mean && params.mu != 0.0) throw InputError(name + ": mu must be 0 without a mean term");

    const double beta_sum = std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
    if (spec.family == GarchFamily::EGARCH) {
        if (!(std::abs(beta_sum) < 1.0)) throw InputError("EGARCH: |sum beta| must be below 1");
        return;
    }
    if (!(params.omega > 0.0)) throw InputError(name + ": omega must be positive");
    for (double a : params.alpha)
        if (a < 0.0) throw InputError(name + ": alpha must be non-negative");
    for (double b : params.beta)
        if (b < 0.0) throw InputError(name + ": beta must be non-negative");
    const double alpha_sum = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0);

    if (spec.family == GarchFamily::CGARCH) {
        if (!(alpha_sum + beta_sum < 1.0)) throw InputError("CGARCH: sum alpha + sum beta must be below 1");
        if (!(params.rho > 0.0 && params.rho < 1.0)) throw InputError("CGARCH: rho must lie in (0,1)");
        if (!(params.eta >= 0.0)) throw InputError("CGARCH: eta must be non-negative");
        return;
    }
    if (spec.family == GarchFamily::GJRGARCH) {
        for (double g : params.gamma)
            if (!(g >= 0.0 && g < 1.0)) throw InputError("GJRGARCH: gamma must lie in [0,1)");
    }
    if (spec.family == GarchFamily::TGARCH || spec.family == GarchFamily::APARCH) {
        for (double g : params.gamma)
            if (!(g > -1.0 && g < 1.0)) throw InputError(name + ": gamma must lie in (-1,1)");
    }
    if (free_delta(spec.family) && !(params.delta > 0.0 && std::isfinite(params.delta)))
        throw InputError(name + ": delta must be positive");

    const auto dist = innovation(spec, params);
    const double delta = family_delta(spec, params);
    double total = beta_sum;
    for (std::size_t i = 0; i < p; ++i) total += params.alpha[i] * kappa_closed(dist, gamma_at(spec, params, i), delta);
    if (spec.family == GarchFamily::IGARCH) {
        if (std::abs(alpha_sum + beta_sum - 1.0) > 1e-10)
            throw InputError("IGARCH: sum alpha + sum beta must equal 1");
        return;
    }
    if (!(total < 1.0)) throw InputError(name + ": persistence must be below 1");
}

VarianceFilter filter_variance(const GarchSpec& spec, const GarchParams& params, std::span<const double> y,
                               std::optional<double> presample_variance) {
    validate(spec, params);
    if (y.size() <= static_cast<std::size_t>(std::max(spec.p, spec.q)))
        throw InputError("return series is shorter than the model orders");
    if (presample_variance && !good(*presample_variance))
        throw InputError("pre-sample variance must be positive");
    VarianceFilter out;
    if (auto failed = run_filter(spec, params, y, presample_variance, out))
        throw NumericalError(std::string(family_name(spec.family)) + " variance recursion left the positive reals",
                             *failed);
    return out;
}

double persistence(const GarchSpec& spec, const GarchParams& params) {
    validate(spec, params);
    const double beta_sum = std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
    if (spec.family == GarchFamily::EGARCH) return beta_sum;
    const double alpha_sum = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0);
    if (spec.family == GarchFamily::GARCH || spec.family == GarchFamily::IGARCH ||
        spec.family == GarchFamily::CGARCH)
        return alpha_sum + beta_sum;
    const auto dist = innovation(spec, params);
    const double delta = family_delta(spec, params);
    double total = beta_sum;
    for (std::size_t i = 0; i < params.alpha.size(); ++i)
        total += params.alpha[i] * asymmetric_power_moment(dist, gamma_at(spec, params, i), delta);
    return total;
}

double garch_loglik(const GarchSpec& spec, const GarchParams& params, std::span<const double> y,
                    std::optional<double> presample_variance) {
    const auto path = filter_variance(spec, params, y, presample_variance);
    return loglik_from_path(spec, params, y, path.sigma2);
}

GarchParams initial_params(const GarchSpec& spec, std::span<const double> y) {
    if (y.empty()) throw InputError("cannot initialize from an empty series");
    const auto p = static_cast<std::size_t>(spec.p);
    const auto q = static_cast<std::size_t>(spec.q);
    const double n = static_cast<double>(y.size());
    const double mean = spec.include_mean ? std::accumulate(y.begin(), y.end(), 0.0) / n : 0.0;
    double s2 = 0.0;
    for (double v : y) s2 += (v - mean) * (v - mean);
    s2 = std::max(s2 / n, 1e-8);

    GarchParams par;
    par.mu = mean;
    par.nu = spec.dist == Distribution::StudentT ? 8.0 : 0.0;
    const auto dist = innovation(spec, par);
    switch (spec.family) {
        case GarchFamily::EGARCH:
            par.alpha.assign(p, -0.05 / static_cast<double>(p));
            par.gamma.assign(p, 0.1 / static_cast<double>(p));
            par.beta.assign(q, 0.95 / static_cast<double>(q));
            par.omega = std::log(s2) * 0.05;
            return par;
        case GarchFamily::CGARCH:
            par.alpha.assign(p, 0.05 / static_cast<double>(p));
            par.beta.assign(q, 0.85 / static_cast<double>(q));
            par.rho = 0.98;
            par.eta = 0.03;
            par.omega = s2 * (1.0 - par.rho);
            return par;
        case GarchFamily::IGARCH:
            par.alpha.assign(p, 0.1 / static_cast<double>(p));
            par.beta.assign(q, 0.9 / static_cast<double>(q));
            par.omega = 0.01 * s2;
            return par;
        default:
            break;
    }
    par.alpha.assign(p, 0.05 / static_cast<double>(p));
    par.beta.assign(q, 0.9 / static_cast<double>(q));
    if (uses_gamma(spec.family)) par.gamma.assign(p, 0.1);
    if (free_delta(spec.family)) par.delta = 1.5;
    const double delta = family_delta(spec, par);
    double total = 0.9;
    for (std::size_t i = 0; i < p; ++i) total += par.alpha[i] * kappa_closed(dist, gamma_at(spec, par, i), delta);
    par.omega = variance_to_power(s2, delta) * std::max(1.0 - total, 0.02);
    return par;
}

std::vector<double> simulate_garch(const GarchSpec& spec, const GarchParams& params, std::size_t n, Rng& rng,
                                   std::size_t burn_in) {
    validate(spec, params);
    if (!is_power_family(spec.family))
        throw InputError(std::string(family_name(spec.family)) + " simulation is not supported");
    const auto p = static_cast<std::size_t>(spec.p);
    const auto q = static_cast<std::size_t>(spec.q);
    const auto dist = innovation(spec, params);
    const double delta = family_delta(spec, params);

    std::vector<double> kappa(p);
    double total = std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        kappa[i] = kappa_closed(dist, gamma_at(spec, params, i), delta);
        total += params.alpha[i] * kappa[i];
    }
    const double h0 = total < 1.0 ? params.omega / (1.0 - total) : params.omega;

    std::normal_distribution<double> normal;
    std::student_t_distribution<double> student(dist.kind == Distribution::StudentT ? dist.nu : 10.0);
    const double t_scale = dist.kind == Distribution::StudentT ? std::sqrt((dist.nu - 2.0) / dist.nu) : 1.0;

    const std::size_t total_n = n + burn_in;
    std::vector<double> e(total_n), h(total_n);
    for (std::size_t t = 0; t < total_n; ++t) {
        double value = params.omega;
        for (std::size_t i = 1; i <= p; ++i) {
            const double g = t >= i ? shock_term(spec.family, e[t - i], gamma_at(spec, params, i - 1), delta)
                                    : kappa[i - 1] * h0;
            value += params.alpha[i - 1] * g;
        }
        for (std::size_t j = 1; j <= q; ++j) value += params.beta[j - 1] * (t >= j ? h[t - j] : h0);
        if (!good(value)) throw NumericalError("simulated variance left the positive reals", t);
        h[t] = value;
        const double z = dist.kind == Distribution::Gaussian ? normal(rng) : student(rng) * t_scale;
        e[t] = std::sqrt(power_to_variance(value, delta)) * z;
    }
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = params.mu + e[burn_in + t];
    return y;
}

std::vector<std::pair<std::string, double>> named_parameters(const GarchSpec& spec, const GarchParams& params) {
    std::vector<std::pair<std::string, double>> out;
    if (spec.include_mean) out.emplace_back("mu", params.mu);
    out.emplace_back("omega", params.omega);
    for (std::size_t i = 0; i < params.alpha.size(); ++i) out.emplace_back("alpha" + std::to_string(i + 1), params.alpha[i]);
    if (uses_gamma(spec.family))
        for (std::size_t i = 0; i < params.gamma.size(); ++i)
            out.emplace_back("gamma" + std::to_string(i + 1), params.gamma[i]);
    for (std::size_t j = 0; j < params.beta.size(); ++j) out.emplace_back("beta" + std::to_string(j + 1), params.beta[j]);
    if (free_delta(spec.family)) out.emplace_back("delta", params.delta);
    if (spec.family == GarchFamily::CGARCH) {
        out.emplace_back("rho", params.rho);
        out.emplace_back("eta", params.eta);
    }
    if (spec.dist == Distribution::StudentT) out.emplace_back("nu", params.nu);
    return out;
}

std::vector<double> encode(const GarchSpec& spec, const GarchParams& params) {
    std::vector<double> theta;
    const auto p = static_cast<std::size_t>(spec.p);
    if (spec.include_mean) theta.push_back(params.mu);
    if (spec.dist == Distribution::StudentT)
        theta.push_back(logit(std::clamp((params.nu - kNuLow) / kNuSpan, 1e-10, 1.0 - 1e-10)));

    if (spec.family == GarchFamily::EGARCH) {
        theta.push_back(params.omega);
        for (double a : params.alpha) theta.push_back(a);
        for (double g : params.gamma) theta.push_back(g);
        const double q = static_cast<double>(spec.q);
        for (double b : params.beta) theta.push_back(std::atanh(std::clamp(b * q, -1.0 + 1e-12, 1.0 - 1e-12)));
        return theta;
    }
    if (free_delta(spec.family))
        theta.push_back(logit(std::clamp(params.delta / kDeltaMax, 1e-10, 1.0 - 1e-10)));
    if (spec.family == GarchFamily::GJRGARCH)
        for (double g : params.gamma) theta.push_back(logit(std::clamp(g, 1e-10, 1.0 - 1e-10)));
    if (spec.family == GarchFamily::TGARCH || spec.family == GarchFamily::APARCH)
        for (double g : params.gamma) theta.push_back(std::atanh(std::clamp(g, -1.0 + 1e-12, 1.0 - 1e-12)));
    theta.push_back(std::log(params.omega));

    std::vector<double> comps;
    if (spec.family == GarchFamily::CGARCH) {
        comps.insert(comps.end(), params.alpha.begin(), params.alpha.end());
    } else {
        const auto dist = innovation(spec, params);
        const double delta = family_delta(spec, params);
        for (std::size_t i = 0; i < p; ++i)
            comps.push_back(params.alpha[i] * kappa_closed(dist, gamma_at(spec, params, i), delta));
    }
    comps.insert(comps.end(), params.beta.begin(), params.beta.end());
    if (spec.family == GarchFamily::IGARCH) comps.pop_back();  // implied by the unit sum
    stick_encode(comps, theta);

    if (spec.family == GarchFamily::CGARCH) {
        theta.push_back(logit(std::clamp(params.rho, 1e-10, 1.0 - 1e-10)));
        theta.push_back(logit(std::clamp(params.eta, 1e-10, 1.0 - 1e-10)));
    }
    return theta;
}

std::optional<GarchParams> decode(const GarchSpec& spec, std::span<const double> theta) {
    const auto p = static_cast<std::size_t>(spec.p);
    const auto q = static_cast<std::size_t>(spec.q);
    std::size_t k = 0;
    auto next = [&] { return theta[k++]; };
    GarchParams par;
    if (spec.include_mean) par.mu = next();
    if (spec.dist == Distribution::StudentT) par.nu = kNuLow + kNuSpan * logistic(next());

    if (spec.family == GarchFamily::EGARCH) {
        par.omega = next();
        for (std::size_t i = 0; i < p; ++i) par.alpha.push_back(next());
        for (std::size_t i = 0; i < p; ++i) par.gamma.push_back(next());
        for (std::size_t j = 0; j < q; ++j) par.beta.push_back(std::tanh(next()) / static_cast<double>(q));
        return par;
    }
    if (free_delta(spec.family)) par.delta = kDeltaMax * logistic(next());
    if (spec.family == GarchFamily::GJRGARCH)
        for (std::size_t i = 0; i < p; ++i) par.gamma.push_back(logistic(next()));
    if (spec.family == GarchFamily::TGARCH || spec.family == GarchFamily::APARCH)
        for (std::size_t i = 0; i < p; ++i) par.gamma.push_back(std::tanh(next()));
    par.omega = std::exp(next());

    const std::size_t free = p + q - (spec.family == GarchFamily::IGARCH ? 1 : 0);
    auto comps = stick_decode(theta.subspan(k, free));
    k += free;
    if (spec.family == GarchFamily::IGARCH) comps.push_back(1.0 - std::accumulate(comps.begin(), comps.end(), 0.0));

    const auto dist = innovation(spec, par);
    const double delta = family_delta(spec, par);
    for (std::size_t i = 0; i < p; ++i) {
        if (spec.family == GarchFamily::CGARCH) {
            par.alpha.push_back(comps[i]);
            continue;
        }
        const double kappa = kappa_closed(dist, gamma_at(spec, par, i), delta);
        if (!(std::isfinite(kappa) && kappa > 0.0)) return std::nullopt;
        par.alpha.push_back(comps[i] / kappa);
    }
    par.beta.assign(comps.begin() + static_cast<std::ptrdiff_t>(p), comps.end());

    if (spec.family == GarchFamily::CGARCH) {
        par.rho = logistic(next());
        par.eta = logistic(next());
    }
    if (!std::isfinite(par.omega) || par.omega <= 0.0) return std::nullopt;
    return par;
}

FittedGarch fit_garch(const GarchSpec& spec, std::span<const double> y, const FitOptions& options,
                      const std::optional<GarchParams>& warm_start) {
    const std::string name(family_name(spec.family));
    if (y.size() <= static_cast<std::size_t>(std::max(spec.p, spec.q)) + 1)
        throw InputError(name + ": not enough observations to fit");
    if (y.size() < 250)
        spdlog::warn("{}: fitting on {} observations (below the recommended 250)", name, y.size());
    if (options.starts < 1) throw InputError("at least one optimizer start is required");

    const double n = static_cast<double>(y.size());
    auto objective = [&](std::span<const double> theta) {
        const auto par = decode(spec, theta);
        if (!par) return kInf;
        VarianceFilter path;
        if (run_filter(spec, *par, y, std::nullopt, path)) return kInf;
        const double ll = loglik_from_path(spec, *par, y, path.sigma2);
        return std::isfinite(ll) ? -ll / n : kInf;
    };

    auto theta0 = encode(spec, initial_params(spec, y));
    if (warm_start) {
        const auto warm = encode(spec, *warm_start);
        if (std::isfinite(objective(warm))) theta0 = warm;
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
    if (!std::isfinite(best.value))
        throw NumericalError(name + ": no optimizer start produced a finite likelihood");

    diag.converged = best.converged;
    if (!best.converged) {
        diag.message = "best start stopped before the gradient tolerance was met";
        spdlog::warn("{}: {}", name, diag.message);
    }
    FittedGarch fit;
    fit.spec = spec;
    fit.params = *decode(spec, best.x);
    fit.n_obs = y.size();
    fit.path = filter_variance(spec, fit.params, y);
    fit.loglik = loglik_from_path(spec, fit.params, y, fit.path.sigma2);
    fit.diagnostics = diag;
    return fit;
}

}  // namespace varmcs::vol
