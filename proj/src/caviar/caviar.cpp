#include "varmcs/caviar/caviar.hpp"

#include "varmcs/common/errors.hpp"
#include "varmcs/common/format.hpp"
#include "varmcs/common/hash.hpp"
#include "varmcs/common/parallel.hpp"
#include "varmcs/common/random.hpp"
#include "varmcs/data/statistics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace varmcs::caviar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lower_tail(const CaviarSpec& spec) { return spec.tau < 0.5; }

/// Returns the failing time index, if any. `out` may be null when only the loss is needed.
std::optional<std::size_t> run_filter(const CaviarSpec& spec, std::span<const double> b, std::span<const double> y,
                                      double f1, std::vector<double>* out, double* next) {
    const double sign = lower_tail(spec) ? -1.0 : 1.0;
    const std::size_t n = y.size();
    if (out) out->resize(n);
    double f = f1;
    double q = sign * f1;  // magnitude state for SAV/AS/IG
    for (std::size_t t = 0; t <= n; ++t) {
        if (t > 0) {
            const double prev = y[t - 1];
            switch (spec.variant) {
                case Variant::SymmetricAbsValue:
                    q = b[0] + b[1] * q + b[2] * std::abs(prev);
                    break;
                case Variant::AsymmetricSlope:
                    q = b[0] + b[1] * q + b[2] * std::max(prev, 0.0) + b[3] * std::max(-prev, 0.0);
                    break;
                case Variant::IndirectGarch: {
                    const double radicand = b[0] + b[1] * q * q + b[2] * prev * prev;
                    if (!(radicand > 0.0)) return t;
                    q = std::sqrt(radicand);
                    break;
                }
                case Variant::Adaptive:
                    f = f + b[0] / (1.0 + std::exp(spec.G * (prev - f)));
                    break;
            }
            if (spec.variant != Variant::Adaptive) f = sign * q;
        }
        if (!std::isfinite(f)) return t;
        if (t < n) {
            if (out) (*out)[t] = f;
        } else if (next) {
            *next = f;
        }
    }
    return std::nullopt;
}

double loss_of(const CaviarSpec& spec, std::span<const double> b, std::span<const double> y, double f1,
               std::vector<double>& scratch) {
    if (spec.variant == Variant::IndirectGarch && (b[0] <= 0.0 || b[1] < 0.0 || b[2] < 0.0)) return kInf;
    if (spec.variant != Variant::Adaptive && !(std::abs(b[1]) < 1.0)) return kInf;
    if (run_filter(spec, b, y, f1, &scratch, nullptr)) return kInf;
    const double loss = tick_loss(y, scratch, spec.tau);
    return std::isfinite(loss) ? loss : kInf;
}

// Sampling box for random starts; `scale` is the magnitude of the initial quantile.
std::vector<std::pair<double, double>> start_box(Variant variant, double scale) {
    switch (variant) {
        case Variant::SymmetricAbsValue:
            return {{0.0, scale}, {0.0, 1.0}, {0.0, 1.0}};
        case Variant::AsymmetricSlope:
            return {{0.0, scale}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
        case Variant::IndirectGarch:
            return {{0.0, scale * scale}, {0.0, 1.0}, {0.0, 1.0}};
        case Variant::Adaptive:
            return {{-scale, scale}};
    }
    return {};
}

}  // namespace

std::string_view variant_name(Variant variant) {
    switch (variant) {
        case Variant::SymmetricAbsValue: return "SAV";
        case Variant::AsymmetricSlope: return "AS";
        case Variant::IndirectGarch: return "IG";
        case Variant::Adaptive: return "ADAPT";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "SAV" || upper == "SYMMETRICABSVALUE") return Variant::SymmetricAbsValue;
    if (upper == "AS" || upper == "ASYMMETRICSLOPE") return Variant::AsymmetricSlope;
    if (upper == "IG" || upper == "INDIRECTGARCH") return Variant::IndirectGarch;
    if (upper == "ADAPT" || upper == "ADAPTIVE") return Variant::Adaptive;
    throw InputError("unknown CAViaR variant '" + std::string(name) + "'");
}

std::size_t parameter_count(Variant variant) {
    switch (variant) {
        case Variant::SymmetricAbsValue: return 3;
        case Variant::AsymmetricSlope: return 4;
        case Variant::IndirectGarch: return 3;
        case Variant::Adaptive: return 1;
    }
    return 0;
}

void validate(const CaviarSpec& spec, const CaviarParams& params) {
    if (!(spec.tau > 0.0 && spec.tau < 1.0)) throw InputError("CAViaR tau must lie in (0,1)");
    if (!(spec.G > 0.0) || !std::isfinite(spec.G)) throw InputError("CAViaR G must be a positive constant");
    const std::size_t k = parameter_count(spec.variant);
    if (params.beta.size() != k)
        throw InputError("CAViaR " + std::string(variant_name(spec.variant)) + " takes " + std::to_string(k) +
                         " coefficients, got " + std::to_string(params.beta.size()));
    for (double b : params.beta)
        if (!std::isfinite(b)) throw InputError("CAViaR coefficients must be finite");
    if (spec.variant == Variant::IndirectGarch &&
        (params.beta[0] <= 0.0 || params.beta[1] < 0.0 || params.beta[2] < 0.0))
        throw InputError("CAViaR IG needs b1 > 0, b2 >= 0, b3 >= 0");
}

double initial_quantile(std::span<const double> y, double tau) {
    if (y.empty()) throw InputError("cannot initialize a quantile from an empty series");
    const std::size_t head = std::max<std::size_t>(1, (y.size() + 9) / 10);
    return data::empirical_quantile(y.first(head), tau);
}

QuantilePath caviar_filter(const CaviarSpec& spec, const CaviarParams& params, std::span<const double> y,
                           std::optional<double> initial) {
    validate(spec, params);
    if (y.empty()) throw InputError("CAViaR filter needs at least one observation");
    const double f1 = initial ? *initial : initial_quantile(y, spec.tau);
    QuantilePath path;
    if (auto failed = run_filter(spec, params.beta, y, f1, &path.quantile, &path.next))
        throw NumericalError("CAViaR quantile recursion diverged", *failed);
    return path;
}

double tick_loss(std::span<const double> y, std::span<const double> quantile, double tau) {
    if (y.size() != quantile.size())
        throw InputError("tick loss needs equal lengths, got " + std::to_string(y.size()) + " and " +
                         std::to_string(quantile.size()));
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("tau must lie in (0,1)");
    double total = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double u = y[t] - quantile[t];
        total += u * (tau - (u < 0.0 ? 1.0 : 0.0));
    }
    return total;
}

CaviarFit caviar_fit(const CaviarSpec& spec, std::span<const double> y, const CaviarFitOptions& options) {
    validate(spec, CaviarParams{std::vector<double>(parameter_count(spec.variant), 1.0)});
    if (y.size() < 10) throw InputError("CAViaR fit needs at least 10 observations");
    if (options.random_starts < 1 || options.polished < 1)
        throw InputError("CAViaR fit needs at least one random start and one polished start");
    const std::size_t k = parameter_count(spec.variant);
    for (const auto& [index, value] : options.fixed)
        if (index >= k) throw InputError("fixed CAViaR coefficient index out of range");

    const double f1 = initial_quantile(y, spec.tau);
    double scale = std::abs(f1);
    if (!(scale > 0.0)) scale = 1.0;

    // Free coordinates are the non-fixed entries of beta.
    std::vector<std::size_t> free_index;
    for (std::size_t i = 0; i < k; ++i)
        if (!options.fixed.count(i)) free_index.push_back(i);
    auto expand = [&](std::span<const double> x) {
        std::vector<double> b(k);
        for (const auto& [index, value] : options.fixed) b[index] = value;
        for (std::size_t j = 0; j < free_index.size(); ++j) b[free_index[j]] = x[j];
        return b;
    };

    const auto box = start_box(spec.variant, scale);
    const auto starts = static_cast<std::size_t>(options.random_starts);
    std::vector<std::vector<double>> candidates(starts);
    Rng rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& c : candidates) {
        c.resize(free_index.size());
        for (std::size_t j = 0; j < free_index.size(); ++j) {
            const auto [lo, hi] = box[free_index[j]];
            c[j] = lo + (hi - lo) * unit(rng);
        }
    }
    if (options.warm_start) {
        if (options.warm_start->beta.size() != k) throw InputError("CAViaR warm start has the wrong arity");
        std::vector<double> c;
        for (std::size_t i : free_index) c.push_back(options.warm_start->beta[i]);
        candidates.push_back(std::move(c));
    }

    std::vector<double> losses(candidates.size());
    parallel_for(candidates.size(), options.workers, [&](std::size_t i) {
        std::vector<double> scratch;
        losses[i] = loss_of(spec, expand(candidates[i]), y, f1, scratch);
    });

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (std::isfinite(losses[i])) order.push_back(i);
    if (order.empty()) throw NumericalError("CAViaR fit: every start diverged");
    const int feasible = static_cast<int>(order.size());
    // Stable ordering keeps the outcome independent of the worker count.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
    std::vector<std::size_t> chosen(order.begin(),
                                    order.begin() + std::min<std::ptrdiff_t>(options.polished, feasible));
    if (options.warm_start) {
        const std::size_t warm = candidates.size() - 1;
        if (std::isfinite(losses[warm]) && std::find(chosen.begin(), chosen.end(), warm) == chosen.end())
            chosen.push_back(warm);
    }

    std::vector<optim::MinimizeResult> polished(chosen.size());
    parallel_for(chosen.size(), options.workers, [&](std::size_t c) {
        std::vector<double> scratch;
        auto objective = [&](std::span<const double> x) { return loss_of(spec, expand(x), y, f1, scratch); };
        if (free_index.empty()) {
            polished[c].x = candidates[chosen[c]];
            polished[c].value = losses[chosen[c]];
            return;
        }
        polished[c] = optim::minimize_nelder_mead(objective, candidates[chosen[c]], options.nelder_mead);
    });

    std::size_t best = 0;
    for (std::size_t c = 1; c < polished.size(); ++c)
        if (polished[c].value < polished[best].value) best = c;

    CaviarFit fit;
    fit.spec = spec;
    fit.params.beta = expand(polished[best].x);
    fit.path = caviar_filter(spec, fit.params, y, f1);
    fit.loss = tick_loss(y, fit.path.quantile, spec.tau);
    fit.feasible_starts = feasible;
    return fit;
}

double caviar_forecast(const CaviarSpec& spec, const CaviarParams& params, std::span<const double> y,
                       std::optional<double> initial) {
    return caviar_filter(spec, params, y, initial).next;
}

std::vector<std::pair<std::string, double>> named_parameters(const CaviarSpec& spec, const CaviarParams& params) {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < params.beta.size(); ++i) out.emplace_back("beta" + std::to_string(i + 1), params.beta[i]);
    out.emplace_back("tau", spec.tau);
    if (spec.variant == Variant::Adaptive) out.emplace_back("G", spec.G);
    return out;
}

std::string export_parameters(const CaviarFit& fit, std::size_t n_obs) {
    const std::string label = "CAViaR-" + std::string(variant_name(fit.spec.variant));
    std::ostringstream out;
    out << "model = " << label << '\n';
    for (const auto& [name, value] : named_parameters(fit.spec, fit.params))
        out << name << " = " << format_double(value) << '\n';
    out << "tick_loss = " << format_double(fit.loss) << '\n';
    out << "n_obs = " << n_obs << '\n';
    out << "spec_hash = " << to_hex(fnv1a64(label)) << '\n';
    return out.str();
}

}  // namespace varmcs::caviar
