#include <gtest/gtest.h>

#include <cmath>

#include "flowdual/pricing.hpp"
#include "flowdual/two_asset.hpp"

using namespace flowdual;

namespace {

TwoAssetParams base(double rho) {
    TwoAssetParams p;
    p.vol1 = VolModel::constant(0.3);
    p.vol2 = VolModel::constant(0.2);
    p.delta1 = 0.01;
    p.delta2 = 0.03;
    p.jumps = {LevyMeasure::zero(), LevyMeasure::zero(), 0.0, {}};
    p.corr = Correlation::constant(rho);
    return p;
}

SimConfig sim(std::size_t paths, std::size_t steps = 16) {
    SimConfig s;
    s.paths = paths;
    s.steps = steps;
    return s;
}

bool agree(const TwoAssetResult& r, double k = 4.0) {
    const double se = r.coupled ? r.coupled_diff_se : std::hypot(r.forward.std_error, r.dual.std_error);
    return std::abs(r.forward.value - r.dual.value) <= k * se;
}

}  // namespace

TEST(TwoAssetIntegrals, BasketIdentity) {
    const double h = 1e-3;
    // (2 + 3 - 4)^+ = 1
    const double v = detail::basket_integral(2000, 3000, 4000, 8000, h);
    EXPECT_NEAR(v, 1.0, 2 * h);
}

TEST(TwoAssetIntegrals, BestOfIdentity) {
    const double h = 1e-3;
    // (max(2, 3) - 2.5)^+ = 0.5
    EXPECT_NEAR(detail::best_of_integral(2000, 3000, 2500, 8000, h), 0.5, 2 * h);
}

TEST(Correlation, Validation) {
    EXPECT_THROW(Correlation::state(0.6, 0.6).validate(), Error);
    EXPECT_NO_THROW(Correlation::state(0.5, 0.5).validate());
    EXPECT_THROW(Correlation::constant(1.2).validate(), Error);
    EXPECT_NEAR(Correlation::state(0.2, 0.3).at(2.0, 1.0), 0.2 + 0.3 * std::tanh(std::log(2.0)), 1e-15);
}

TEST(TwoAsset, LognormalQuadratureOracle) {
    const MarketParams mk{0.05, 0.0, 1.0, 1.0, 2.0, 0.0};
    const TwoAssetParams p = base(0.0);
    const TwoAssetAll all = mc_two_asset_all(p, mk, sim(20000, 4));
    const double qb = lognormal_two_asset_quadrature(TwoAssetPayoff::basket_call, 0.3, 0.2, p, mk);
    const double qm = lognormal_two_asset_quadrature(TwoAssetPayoff::best_of_call, 0.3, 0.2, p, mk);
    EXPECT_LE(std::abs(all.basket.forward.value - qb), 4 * all.basket.forward.std_error);
    EXPECT_LE(std::abs(all.basket.dual.value - qb), 4 * all.basket.dual.std_error);
    EXPECT_LE(std::abs(all.best_of.forward.value - qm), 4 * all.best_of.forward.std_error);
    EXPECT_LE(std::abs(all.best_of.dual.value - qm), 4 * all.best_of.dual.std_error);
}

TEST(TwoAsset, QuadratureReducesToSingleAsset) {
    MarketParams mk{0.05, 0.0, 1.0, 1.0, 1.0, 0.0};
    TwoAssetParams p = base(0.0);
    p.x2 = 1e-12;
    const double q = lognormal_two_asset_quadrature(TwoAssetPayoff::basket_call, 0.3, 0.2, p, mk);
    MarketParams single{0.05, 0.01, 1.0, 1.0, 1.0, 0.0};
    EXPECT_NEAR(q, bs_closed_form(0.3, single, ClosedFormKind::call), 1e-8);
}

TEST(TwoAsset, DegenerateSecondAsset) {
    const MarketParams mk{0.05, 0.0, 1.0, 1.0, 1.0, 0.0};
    TwoAssetParams p = base(0.5);
    p.vol1 = VolModel::tanh_smile(0.25, 0.1, -0.5, 0.0, 1.0);
    p.x2 = 1e-8;
    const TwoAssetResult r = mc_two_asset(TwoAssetPayoff::basket_call, p, mk, sim(20000));
    const MarketParams single{0.05, 0.01, 1.0, 1.0, 1.0, 0.0};
    const McEstimate c = mc_price(Payoff::call, single, p.vol1, LevyMeasure::zero(), sim(20000));
    EXPECT_LE(std::abs(r.dual.value - c.value), 4 * std::hypot(r.dual.std_error, c.std_error));
}

TEST(TwoAsset, CommonJumpsCorrelated) {
    const MarketParams mk{0.05, 0.0, 1.0, 1.0, 2.0, 0.0};
    TwoAssetParams p = base(0.5);
    p.jumps = {LevyMeasure::single_atom(0.5, 0.1), LevyMeasure::single_atom(0.5, -0.15), 1.0,
               {{-0.1, -0.05, 0.5}, {0.05, 0.1, 0.5}}};
    const TwoAssetAll all = mc_two_asset_all(p, mk, sim(10000));
    EXPECT_TRUE(agree(all.basket));
    EXPECT_TRUE(agree(all.best_of));
    EXPECT_FALSE(all.basket.coupled);
}

TEST(TwoAsset, StateCorrelationCoupled) {
    const MarketParams mk{0.05, 0.0, 1.0, 1.0, 2.0, 0.0};
    TwoAssetParams p = base(0.0);
    p.corr = Correlation::state(0.2, 0.5);
    const TwoAssetAll all = mc_two_asset_all(p, mk, sim(10000));
    EXPECT_TRUE(all.basket.coupled);
    EXPECT_TRUE(agree(all.basket));
    EXPECT_TRUE(agree(all.best_of));
}

TEST(TwoAsset, WPoint) {
    const MarketParams mk{0.05, 0.0, 1.0, 1.0, 1.0, 0.0};
    TwoAssetParams p = base(0.5);
    p.jumps = {LevyMeasure::single_atom(1.0, -0.1), LevyMeasure::zero(), 0.0, {}};
    const TwoAssetResult r = mc_two_asset_w(p, mk, sim(20000), 0.95, 1.05);
    EXPECT_TRUE(agree(r));
    EXPECT_GT(r.forward.value, 0.0);
}
