#include "varmcs/common/errors.hpp"
#include "varmcs/loss/loss.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace varmcs;
using namespace varmcs::loss;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {
double one(const std::vector<double>& v) {
    REQUIRE(v.size() == 1);
    return v[0];
}
std::vector<double> vec(double x) { return {x}; }
}  // namespace

TEST_CASE("VaR losses", "[loss]") {
    CHECK_THAT(one(loss_var(vec(-3), vec(-2), 0.05)), WithinAbs(0.95, 1e-15));
    CHECK_THAT(one(loss_var(vec(1), vec(-2), 0.05)), WithinAbs(0.15, 1e-15));
    CHECK(one(loss_var(vec(-1.3), vec(-1.3), 0.05, VarLossType::Differentiable)) == 0.0);
    CHECK_THROWS_AS(loss_var(vec(1), std::vector<double>{1, 2}, 0.05), InputError);
    CHECK_THROWS_AS(loss_var(vec(1), vec(1), 0.05, VarLossType::Differentiable, 0.0), InputError);

    // smooth version approaches the tick loss
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    double gap = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double y = u(rng);
        double v = u(rng);
        if (std::abs(y - v) < 0.01) v += 0.05;
        const double a = one(loss_var(vec(y), vec(v), 0.05));
        const double b = one(loss_var(vec(y), vec(v), 0.05, VarLossType::Differentiable, 1e4));
        gap = std::max(gap, std::abs(a - b));
    }
    CHECK(gap <= 1e-3);
}

TEST_CASE("normal VaR loss is minimized at the sample quantile", "[loss]") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    std::vector<double> y(20000);
    for (auto& v : y) v = z(rng);
    double best = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (double c = -3.0; c <= 0.0; c += 0.001) {
        const auto l = loss_var(y, std::vector<double>(y.size(), c), 0.05);
        double s = 0.0;
        for (double v : l) s += v;
        if (s < best) {
            best = s;
            arg = c;
        }
    }
    auto sorted = y;
    std::sort(sorted.begin(), sorted.end());
    const double q = sorted[static_cast<std::size_t>(0.05 * y.size())];
    CHECK_THAT(arg, WithinAbs(q, 0.002));
}

TEST_CASE("volatility and level losses", "[loss]") {
    CHECK_THAT(one(loss_vol(vec(1.2), vec(1.0), VolLoss::SE1)), WithinAbs(0.04, 1e-15));
    CHECK(one(loss_vol(vec(0.7), vec(0.7), VolLoss::AE2)) == 0.0);
    CHECK_THAT(one(loss_vol(vec(1.0), vec(1.0), VolLoss::QLIKE)), WithinAbs(1.0, 1e-15));
    CHECK_THROWS_AS(loss_vol(vec(1.0), vec(0.0), VolLoss::QLIKE), InputError);
    CHECK_THROWS_AS(loss_vol(vec(-1.0), vec(1.0), VolLoss::R2LOG), InputError);

    for (auto which : {VolLoss::SE1, VolLoss::SE2, VolLoss::R2LOG, VolLoss::AE1, VolLoss::AE2}) {
        INFO(to_string(which));
        CHECK(one(loss_vol(vec(1.3), vec(1.3), which)) == 0.0);
        CHECK(one(loss_vol(vec(1.3), vec(0.9), which)) > 0.0);
    }
    CHECK(one(loss_level(vec(2), vec(2), LevelLoss::SE)) == 0.0);
    CHECK(one(loss_level(vec(3), vec(1), LevelLoss::SE)) == 4.0);
    CHECK(one(loss_level(vec(3), vec(1), LevelLoss::AE)) == 2.0);

    CHECK(parse_vol_loss("qlike") == VolLoss::QLIKE);
    CHECK(parse_level_loss("AE") == LevelLoss::AE);
    CHECK(parse_var_loss_type("differentiable") == VarLossType::Differentiable);
    CHECK_THROWS_AS(parse_vol_loss("MSE"), InputError);
}

TEST_CASE("loss matrix construction", "[loss]") {
    const std::vector<double> y{-3.0, 1.0, -0.5};
    LossKind kind;
    kind.tau = 0.05;
    const auto m = build_loss_matrix(y, {"a", "b"}, {{-2.0, -2.0, -2.0}, {-1.0, -1.0, -1.0}}, kind);
    REQUIRE(m.models() == 2);
    REQUIRE(m.periods() == 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t t = 0; t < 3; ++t)
            CHECK(m.rows[i][t] == one(loss_var(vec(y[t]), vec(i == 0 ? -2.0 : -1.0), 0.05)));

    const auto same = build_loss_matrix(y, {"a", "b"}, {{-1, -1, -1}, {-1, -1, -1}}, kind);
    CHECK(same.rows[0] == same.rows[1]);

    LossKind level;
    level.family = LossKind::Family::Level;
    const auto zero = build_loss_matrix(y, {"self"}, {y}, level);
    for (double v : zero.rows[0]) CHECK(v == 0.0);

    LossKind vol;
    vol.family = LossKind::Family::Vol;
    vol.vol = VolLoss::QLIKE;
    try {
        build_loss_matrix(std::vector<double>{1, 1, 1}, {"x", "bad"}, {{1, 1, 1}, {1, 0, 1}}, vol);
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK_THAT(e.what(), ContainsSubstring("bad"));
    }
}

TEST_CASE("loss CSV round trip", "[loss]") {
    LossMatrix m;
    m.names = {"GARCH-N", "with,comma"};
    m.rows = {{0.1, 0.2, 1e-17}, {3.0, -0.0, 0.5}};
    std::stringstream io;
    write_loss_csv(io, m);
    const auto back = read_loss_csv(io);
    CHECK(back.names == m.names);
    CHECK(back.rows == m.rows);

    std::istringstream headerless("m1,1,2,3\nm2,4,5,6\n");
    const auto h = read_loss_csv(headerless);
    CHECK(h.models() == 2);
    CHECK(h.rows[1][2] == 6.0);

    std::istringstream ragged("model,t1,t2\nm1,1,2\nm2,1\n");
    CHECK_THROWS_AS(read_loss_csv(ragged), InputError);
    std::istringstream bad("m1,1,x\n");
    CHECK_THROWS_AS(read_loss_csv(bad), InputError);
    std::istringstream nonfinite("m1,1,inf\nm2,1,1\n");
    CHECK_THROWS_AS(read_loss_csv(nonfinite), InputError);
}
