#include "varmcs/common/errors.hpp"
#include "varmcs/vol/forecast.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace varmcs;
using namespace varmcs::vol;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("VaR of the forecast laws", "[forecast]") {
    ConditionalForecast g;
    CHECK_THAT(var_from_forecast(g, 0.05), WithinAbs(-1.6448536269514722, 1e-12));
    g.location = 0.3;
    g.scale2 = 4.0;
    CHECK_THAT(var_from_forecast(g, 0.5), WithinAbs(0.3, 1e-14));
    CHECK_THAT(var_from_forecast(g, 0.01), WithinAbs(0.3 - 2 * 2.3263478740408408, 1e-10));

    ConditionalForecast t{0.0, 1.0, 1e6, ForecastLaw::UnitVarianceT};
    CHECK_THAT(var_from_forecast(t, 0.05), WithinAbs(-1.6448536269514722, 1e-4));
    t.shape = 5.0;
    t.location = -0.2;
    CHECK_THAT(var_from_forecast(t, 0.5), WithinAbs(-0.2, 1e-14));
    const double q = boost::math::quantile(boost::math::students_t(5.0), 0.05);
    CHECK_THAT(var_from_forecast(t, 0.05), WithinRel(-0.2 + q * std::sqrt(3.0 / 5.0), 1e-12));

    ConditionalForecast s{0.1, 2.0, 4.0, ForecastLaw::ScaledT};
    const double q4 = boost::math::quantile(boost::math::students_t(4.0), 0.01);
    CHECK_THAT(var_from_forecast(s, 0.01), WithinRel(0.1 + std::sqrt(2.0) * q4, 1e-12));

    CHECK_THROWS_AS(var_from_forecast(g, 0.0), InputError);
    CHECK_THROWS_AS(var_from_forecast(g, 1.0), InputError);
}

TEST_CASE("forecasts from fitted models", "[forecast]") {
    FittedGarch garch;
    garch.spec.dist = Distribution::StudentT;
    garch.params.mu = 0.05;
    garch.params.nu = 6.0;
    garch.path.next_sigma2 = 2.5;
    const auto f = one_step_forecast(garch);
    CHECK(f.law == ForecastLaw::UnitVarianceT);
    CHECK(f.scale2 == 2.5);
    CHECK(f.shape == 6.0);
    CHECK(var_from_model(garch, 0.5) == 0.05);

    FittedGas gas;
    gas.spec.dist = GasDist::StudentT;
    gas.path.next = {0.01, 1.5, 7.0};
    const auto h = one_step_forecast(gas);
    CHECK(h.law == ForecastLaw::ScaledT);
    CHECK(h.location == 0.01);
    CHECK(h.shape == 7.0);
}

TEST_CASE("parameter export layout", "[forecast]") {
    FittedGarch garch;
    garch.spec.family = GarchFamily::GJRGARCH;
    garch.params.mu = 0.01;
    garch.params.omega = 0.02;
    garch.params.alpha = {0.03};
    garch.params.gamma = {0.2};
    garch.params.beta = {0.9};
    garch.loglik = -1234.5;
    garch.n_obs = 1000;
    const auto text = export_parameters(garch);
    CHECK_THAT(text, ContainsSubstring("model = GJRGARCH(1,1)-N\n"));
    CHECK_THAT(text, ContainsSubstring("gamma1 = 0.2\n"));
    CHECK_THAT(text, ContainsSubstring("loglik = -1234.5\n"));
    CHECK_THAT(text, ContainsSubstring("n_obs = 1000\n"));
    CHECK_THAT(text, ContainsSubstring("spec_hash = "));

    FittedGas gas;
    gas.spec = {GasDist::StudentT, Scaling::InverseFisher, false};
    const auto g = export_parameters(gas);
    CHECK_THAT(g, ContainsSubstring("model = GAS-T a=1\n"));
    CHECK_THAT(g, ContainsSubstring("beta_nu = "));
}
