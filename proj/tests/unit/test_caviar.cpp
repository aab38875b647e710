#include "varmcs/caviar/caviar.hpp"
#include "varmcs/common/errors.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace varmcs;
using namespace varmcs::caviar;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> y(n);
    for (auto& v : y) v = z(rng);
    return y;
}

// y_t = sigma_t z_t with sigma_t chosen so that -q_t is the exact tau-quantile of y_t.
std::vector<double> simulate_sav(double b1, double b2, double b3, double tau, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const double z_tau = 1.6448536269514722;  // -Phi^{-1}(0.05)
    REQUIRE(tau == 0.05);
    double q = b1 / (1.0 - b2 - b3 * 0.8);
    double prev = 0.0;
    std::vector<double> y(n + 200);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (t > 0) q = b1 + b2 * q + b3 * std::abs(prev);
        y[t] = q / z_tau * z(rng);
        prev = y[t];
    }
    return {y.begin() + 200, y.end()};
}

double rho(double u, double tau) { return u * (tau - (u < 0 ? 1.0 : 0.0)); }

}  // namespace

TEST_CASE("tick loss", "[caviar]") {
    const std::vector<double> y{1.0, -2.0, 0.5};
    CHECK(tick_loss(y, y, 0.05) == 0.0);
    CHECK_THAT(tick_loss(std::vector<double>{1.0}, std::vector<double>{0.0}, 0.05), WithinAbs(0.05, 1e-15));
    CHECK_THAT(tick_loss(std::vector<double>{-1.0}, std::vector<double>{0.0}, 0.05), WithinAbs(0.95, 1e-15));
    const std::vector<double> f{0.2, -1.0, 0.9};
    const double base = tick_loss(y, f, 0.1);
    CHECK(base >= 0.0);
    std::vector<double> y2 = y, f2 = f;
    for (auto& v : y2) v += 7.0;
    for (auto& v : f2) v += 7.0;
    CHECK_THAT(tick_loss(y2, f2, 0.1), WithinAbs(base, 1e-12));
    CHECK_THROWS_AS(tick_loss(y, std::vector<double>{1.0}, 0.1), InputError);
}

TEST_CASE("SAV recursion by hand", "[caviar]") {
    const CaviarSpec spec{Variant::SymmetricAbsValue, 0.05, 10.0};
    const CaviarParams par{{0.1, 0.8, 0.2}};
    const std::vector<double> y{-2.0, 0.5};
    const auto path = caviar_filter(spec, par, y, -1.0);
    CHECK(path.quantile[0] == -1.0);
    CHECK_THAT(path.quantile[1], WithinAbs(-1.3, 1e-15));
    CHECK_THAT(path.next, WithinAbs(-(0.1 + 0.8 * 1.3 + 0.2 * 0.5), 1e-15));
    CHECK_THAT(caviar_forecast(spec, par, std::vector<double>{-2.0}, -1.0), WithinAbs(-1.3, 1e-15));

    // upper tail reports the magnitude itself
    const CaviarSpec upper{Variant::SymmetricAbsValue, 0.95, 10.0};
    CHECK_THAT(caviar_filter(upper, par, y, 1.0).quantile[1], WithinAbs(1.3, 1e-15));
}

TEST_CASE("variant identities", "[caviar]") {
    const auto y = noise(300, 4);
    const CaviarSpec sav{Variant::SymmetricAbsValue, 0.05, 10.0};
    const CaviarSpec as{Variant::AsymmetricSlope, 0.05, 10.0};
    const auto a = caviar_filter(sav, {{0.05, 0.85, 0.15}}, y);
    const auto b = caviar_filter(as, {{0.05, 0.85, 0.15, 0.15}}, y);
    for (std::size_t t = 0; t < y.size(); ++t) CHECK_THAT(b.quantile[t], WithinAbs(a.quantile[t], 1e-14));

    const CaviarSpec ad{Variant::Adaptive, 0.05, 10.0};
    const auto frozen = caviar_filter(ad, {{0.0}}, y, -1.7);
    for (double f : frozen.quantile) CHECK(f == -1.7);
    CHECK(frozen.next == -1.7);
    CHECK(caviar_forecast(ad, {{0.0}}, y, -1.7) == frozen.quantile.back());

    // IG squares through the root
    const CaviarSpec ig{Variant::IndirectGarch, 0.05, 10.0};
    const auto g = caviar_filter(ig, {{0.1, 0.8, 0.1}}, y, -1.0);
    CHECK_THAT(g.quantile[1], WithinAbs(-std::sqrt(0.1 + 0.8 + 0.1 * y[0] * y[0]), 1e-14));
}

TEST_CASE("scaling the returns scales the quantile path", "[caviar]") {
    const auto y = noise(200, 9);
    std::vector<double> y3 = y;
    for (auto& v : y3) v *= 3.0;
    const double f1 = -1.1;
    const CaviarSpec sav{Variant::SymmetricAbsValue, 0.05, 10.0};
    const auto a = caviar_filter(sav, {{0.05, 0.8, 0.2}}, y, f1);
    const auto b = caviar_filter(sav, {{0.15, 0.8, 0.2}}, y3, 3 * f1);
    const CaviarSpec as{Variant::AsymmetricSlope, 0.05, 10.0};
    const auto c = caviar_filter(as, {{0.05, 0.8, 0.1, 0.3}}, y, f1);
    const auto d = caviar_filter(as, {{0.15, 0.8, 0.1, 0.3}}, y3, 3 * f1);
    const CaviarSpec ig{Variant::IndirectGarch, 0.05, 10.0};
    const auto e = caviar_filter(ig, {{0.05, 0.8, 0.1}}, y, f1);
    const auto h = caviar_filter(ig, {{0.45, 0.8, 0.1}}, y3, 3 * f1);
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK_THAT(b.quantile[t], WithinRel(3 * a.quantile[t], 1e-12));
        CHECK_THAT(d.quantile[t], WithinRel(3 * c.quantile[t], 1e-12));
        CHECK_THAT(h.quantile[t], WithinRel(3 * e.quantile[t], 1e-12));
    }
}

TEST_CASE("SAV forecast is monotone in the last shock", "[caviar]") {
    const CaviarSpec sav{Variant::SymmetricAbsValue, 0.05, 10.0};
    const CaviarParams par{{0.05, 0.8, 0.2}};
    std::vector<double> y = noise(50, 2);
    double previous = 0.0;
    for (int i = 0; i <= 20; ++i) {
        y.back() = -0.25 * i;
        const double f = caviar_forecast(sav, par, y);
        if (i > 0) CHECK(f < previous);
        previous = f;
    }
}

TEST_CASE("validation", "[caviar]") {
    const CaviarSpec sav{Variant::SymmetricAbsValue, 0.05, 10.0};
    CHECK_THROWS_AS(validate(sav, {{0.1, 0.2}}), InputError);
    CHECK_THROWS_AS(validate({Variant::IndirectGarch, 0.05, 10.0}, {{0.0, 0.5, 0.1}}), InputError);
    CHECK_THROWS_AS(validate({Variant::Adaptive, 0.05, -1.0}, {{0.1}}), InputError);
    CHECK_THROWS_AS(validate({Variant::Adaptive, 1.0, 10.0}, {{0.1}}), InputError);
    CHECK(parse_variant("adaptive") == Variant::Adaptive);
    CHECK(parse_variant("sav") == Variant::SymmetricAbsValue);
    CHECK_THROWS_AS(parse_variant("xyz"), InputError);
}

TEST_CASE("constant-quantile fit recovers the sample quantile", "[caviar]") {
    const auto y = noise(600, 12);
    const CaviarSpec spec{Variant::SymmetricAbsValue, 0.05, 10.0};
    CaviarFitOptions options;
    options.random_starts = 200;
    options.fixed = {{1, 0.0}, {2, 0.0}};
    const auto fit = caviar_fit(spec, y, options);
    CHECK(fit.params.beta[1] == 0.0);
    CHECK(fit.params.beta[2] == 0.0);

    // grid oracle over the kinks of the piecewise-linear objective (periods 2..n)
    const double f1 = fit.path.quantile[0];
    double best = std::numeric_limits<double>::infinity();
    double best_c = 0.0;
    for (std::size_t j = 1; j < y.size(); ++j) {
        double loss = 0.0;
        for (std::size_t t = 1; t < y.size(); ++t) loss += rho(y[t] - y[j], 0.05);
        if (loss < best) {
            best = loss;
            best_c = y[j];
        }
    }
    const double fitted = fit.loss - rho(y[0] - f1, 0.05);
    CHECK(fitted <= best + 1e-6);
    CHECK_THAT(-fit.params.beta[0], WithinAbs(best_c, 0.05));
}

TEST_CASE("fitted SAV reaches nominal coverage", "[caviar][slow]") {
    const auto y = simulate_sav(0.05, 0.85, 0.1, 0.05, 5000, 77);
    const CaviarSpec spec{Variant::SymmetricAbsValue, 0.05, 10.0};
    CaviarFitOptions options;
    options.random_starts = 1000;
    const auto fit = caviar_fit(spec, y, options);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < y.size(); ++t) hits += y[t] < fit.path.quantile[t];
    CHECK_THAT(static_cast<double>(hits) / y.size(), WithinAbs(0.05, 0.01));

    // the fit beats every random start it could have kept
    CaviarFitOptions one = options;
    one.random_starts = 1;
    one.polished = 1;
    CHECK(fit.loss <= caviar_fit(spec, y, one).loss + 1e-9);

    const auto text = export_parameters(fit, y.size());
    CHECK_THAT(text, ContainsSubstring("model = CAViaR-SAV\n"));
    CHECK_THAT(text, ContainsSubstring("tick_loss = "));
}

TEST_CASE("fit is deterministic across worker counts", "[caviar]") {
    const auto y = noise(400, 31);
    const CaviarSpec spec{Variant::AsymmetricSlope, 0.05, 10.0};
    CaviarFitOptions a;
    a.random_starts = 300;
    a.polished = 3;
    CaviarFitOptions b = a;
    b.workers = 4;
    const auto fa = caviar_fit(spec, y, a);
    const auto fb = caviar_fit(spec, y, b);
    CHECK(fa.params.beta == fb.params.beta);
    CHECK(fa.loss == fb.loss);
}
