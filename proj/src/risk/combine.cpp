#include "varmcs/risk/combine.hpp"

#include "varmcs/common/errors.hpp"
#include "varmcs/loss/loss.hpp"

#include <algorithm>
#include <cmath>

namespace varmcs::risk {

std::vector<double> combine_var_average(const ForecastPanel& panel) {
    panel.validate();
    if (panel.models() == 0) throw InputError("cannot combine an empty forecast panel");
    const double m = static_cast<double>(panel.models());
    std::vector<double> out(panel.periods());
    for (std::size_t t = 0; t < out.size(); ++t) {
        double sum = 0.0;
        for (const auto& col : panel.var) sum += col[t];
        out[t] = sum / m;
    }
    return out;
}

DynamicCombination combine_var_dynamic(const ForecastPanel& panel, double eta, double lambda) {
    panel.validate();
    if (panel.models() == 0) throw InputError("cannot combine an empty forecast panel");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw InputError("combination eta must be nonnegative");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("combination lambda must lie in (0,1]");

    const std::size_t m = panel.models();
    const std::size_t n = panel.periods();
    std::vector<std::vector<double>> losses(m);
    for (std::size_t i = 0; i < m; ++i) losses[i] = loss::loss_var(panel.realized, panel.var[i], panel.tau);

    DynamicCombination out;
    out.var.resize(n);
    out.weights.assign(n, std::vector<double>(m));
    out.discounted_loss.assign(n, std::vector<double>(m));
    std::vector<double> discounted(m, 0.0);
    std::vector<double> raw(m, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
        // Unnormalized weights keep eta = 0 bit-identical to the plain average.
        double total = 0.0;
        double weighted = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            total += raw[i];
            weighted += raw[i] * panel.var[i][t];
        }
        out.var[t] = weighted / total;
        for (std::size_t i = 0; i < m; ++i) out.weights[t][i] = raw[i] / total;

        for (std::size_t i = 0; i < m; ++i) discounted[i] = lambda * discounted[i] + losses[i][t];
        out.discounted_loss[t] = discounted;
        const double best = *std::min_element(discounted.begin(), discounted.end());
        for (std::size_t i = 0; i < m; ++i) raw[i] = std::exp(-eta * (discounted[i] - best));
    }
    return out;
}

}  // namespace varmcs::risk
