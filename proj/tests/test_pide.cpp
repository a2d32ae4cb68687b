#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "flowdual/pide.hpp"
#include "flowdual/pricing.hpp"

using namespace flowdual;

namespace {

const MarketParams kMk{0.05, 0.02, 1.0, 1.0, 1.0, 0.0};
const VolModel kConst = VolModel::constant(0.3);

double max_rel(const PideSurface& s, std::size_t i, double lo, double hi,
               const std::function<double(double)>& ref) {
    double worst = 0.0;
    for (std::size_t j = 0; j <= s.grid.J; ++j) {
        const double y = s.grid.strike(j);
        if (y < lo - 1e-12 || y > hi + 1e-12) continue;
        worst = std::max(worst, std::abs(s.at(i, j) / ref(y) - 1.0));
    }
    return worst;
}

double bs_at(double y, ClosedFormKind kind, double T = 1.0) {
    MarketParams mk = kMk;
    mk.y = y;
    mk.T = T;
    return bs_closed_form(0.3, mk, kind);
}

}  // namespace

TEST(PideGrid, AroundPlacesSpotOnNode) {
    const PideGrid g = PideGrid::around(1.3, 0.3, 1.0, 101, 50, 6.0);
    EXPECT_EQ(g.J % 2, 0u);
    EXPECT_NEAR(g.xi(g.J / 2), std::log(1.3), 1e-13);
    EXPECT_LE(g.y_min, 1.3 * std::exp(-5 * 0.3));
    EXPECT_GE(g.y_max, 1.3 * std::exp(5 * 0.3));
}

TEST(Dupire, InitialRowExact) {
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 100, 50, 7.0);
    const PideSurface s = solve_dupire_surface(kConst, LevyMeasure::single_atom(1.0, -0.1), kMk, g);
    for (std::size_t j = 0; j <= g.J; ++j) EXPECT_EQ(s.at(0, j), std::max(1.0 - g.strike(j), 0.0));
}

TEST(Dupire, ClosedFormAccuracyAndOrder) {
    const PideGrid fine = PideGrid::around(1.0, 0.3, 1.0, 400, 200, 7.0);
    const PideGrid coarse = PideGrid::around(1.0, 0.3, 1.0, 200, 100, 7.0);
    auto ref = [](double y) { return bs_at(y, ClosedFormKind::call); };
    const double ef = max_rel(solve_dupire_surface(kConst, LevyMeasure::zero(), kMk, fine), fine.I, 0.8, 1.2, ref);
    const double ec = max_rel(solve_dupire_surface(kConst, LevyMeasure::zero(), kMk, coarse), coarse.I, 0.8, 1.2, ref);
    EXPECT_LT(ef, 1e-3);
    EXPECT_GE(ec / ef, 3.5);
}

TEST(Dupire, AtomicJumpsAgainstSeries) {
    const auto m = LevyMeasure::single_atom(1.0, -0.1);
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 400, 200, 7.0);
    const PideSurface s = solve_dupire_surface(kConst, m, kMk, g);
    auto ref = [&](double y) {
        MarketParams mk = kMk;
        mk.y = y;
        return atomic_series_call(0.3, mk, m);
    };
    EXPECT_LT(max_rel(s, g.I, 0.8, 1.2, ref), 5e-3);
}

TEST(Dupire, ShapeConstraints) {
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 200, 100, 7.0);
    const PideSurface s = solve_dupire_surface(VolModel::tanh_smile(0.25, 0.1, -0.5, 0.0, 1.0),
                                               LevyMeasure::double_exponential(1.0, 0.4, 10.0, 5.0), kMk, g);
    for (std::size_t i = 0; i <= g.I; ++i) {
        for (std::size_t j = 1; j < g.J; ++j) {
            EXPECT_LE(s.at(i, j + 1), s.at(i, j) + 1e-12);
            const double y0 = g.strike(j - 1), y1 = g.strike(j), y2 = g.strike(j + 1);
            const double d2 = (s.at(i, j + 1) - s.at(i, j)) / (y2 - y1) - (s.at(i, j) - s.at(i, j - 1)) / (y1 - y0);
            EXPECT_GE(d2, -1e-7);
        }
    }
}

TEST(Dupire, JumpStepLimit) {
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 100, 2, 7.0);
    EXPECT_THROW(solve_dupire_surface(kConst, LevyMeasure::single_atom(5.0, -0.1), kMk, g), Error);
}

TEST(Binary, ClosedFormAndBounds) {
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 400, 200, 7.0);
    const PideSurface c = solve_binary_surface(kConst, LevyMeasure::zero(), kMk, g);
    auto ref = [](double y) { return bs_at(y, ClosedFormKind::binary); };
    EXPECT_LT(max_rel(c, g.I, 0.8, 1.2, ref), 2e-3);
    for (std::size_t i = 1; i <= g.I; ++i) {
        const double cap = std::exp(-kMk.r * g.maturity(i));
        for (std::size_t j = 0; j <= g.J; ++j) {
            EXPECT_GE(c.at(i, j), -1e-7);
            EXPECT_LE(c.at(i, j), cap + 1e-7);
            if (j) {
                EXPECT_LE(c.at(i, j), c.at(i, j - 1) + 1e-7);
            }
        }
    }
}

TEST(Binary, SmallVolApproachesStep) {
    const VolModel tiny = VolModel::constant(0.01);
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 400, 200, 7.0);
    const PideSurface c = solve_binary_surface(tiny, LevyMeasure::zero(), kMk, g);
    const double fwd = std::exp(0.03), disc = std::exp(-0.05);
    for (std::size_t j = 0; j <= g.J; ++j) {
        const double y = g.strike(j);
        if (std::abs(std::log(y / fwd)) < 0.1) continue;
        EXPECT_NEAR(c.at(g.I, j), y <= fwd ? disc : 0.0, 1e-3) << y;
    }
}

TEST(Binary, IntegratesToCall) {
    const auto m = LevyMeasure::single_atom(1.0, -0.1);
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 400, 200, 7.0);
    const PideSurface call = solve_dupire_surface(kConst, m, kMk, g);
    const PideSurface integ = binary_to_call(solve_binary_surface(kConst, m, kMk, g));
    for (std::size_t j = 0; j <= g.J; ++j) {
        const double y = g.strike(j);
        if (y < 0.8 || y > 1.2) continue;
        EXPECT_NEAR(integ.at(g.I, j) / call.at(g.I, j), 1.0, 2e-3);
    }
    EXPECT_EQ(integ.at(g.I, g.J), 0.0);
}

TEST(Binary, StepIntegralReproducesForwardIntrinsic) {
    PideSurface c;
    c.kind = SurfaceKind::binary;
    c.grid = PideGrid::around(1.0, 0.3, 1.0, 2000, 2, 7.0);
    c.x = 1.0;
    const double fwd = std::exp(0.03), disc = std::exp(-0.05);
    c.values.resize(3 * (c.grid.J + 1));
    for (std::size_t i = 0; i <= 2; ++i)
        for (std::size_t j = 0; j <= c.grid.J; ++j) c.at(i, j) = c.grid.strike(j) <= fwd ? disc : 0.0;
    const PideSurface call = binary_to_call(c);
    for (std::size_t j = 0; j <= c.grid.J; j += 100) {
        const double y = c.grid.strike(j);
        EXPECT_NEAR(call.at(2, j), disc * std::max(fwd - y, 0.0), 2e-3);
    }
}

TEST(LocalVol, RoundTripConstantAndSmile) {
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 400, 200, 7.0);
    for (const VolModel& v : {kConst, VolModel::tanh_smile(0.25, 0.1, -0.5, 0.0, 1.0)}) {
        const PideSurface s = solve_dupire_surface(v, LevyMeasure::zero(), kMk, g);
        const LocalVolGrid lv = extract_local_vol(s, kMk);
        const double tol = v.is_constant() ? 0.01 : 0.02;
        for (std::size_t i = 1; i <= g.I; ++i) {
            if (g.maturity(i) < 0.25) continue;
            for (std::size_t j = 1; j < g.J; ++j) {
                const double y = g.strike(j);
                if (y < 0.8 || y > 1.2) continue;
                ASSERT_TRUE(lv.is_valid(i, j));
                EXPECT_NEAR(lv.at(i, j) / v.sigma(g.maturity(i), y), 1.0, tol);
            }
        }
    }
}

TEST(LocalVol, IntrinsicSurfaceInvalid) {
    PideSurface s;
    s.grid = PideGrid::around(1.0, 0.3, 1.0, 100, 10, 7.0);
    s.values.resize((s.grid.I + 1) * (s.grid.J + 1));
    for (std::size_t i = 0; i <= s.grid.I; ++i) {
        const double T = s.grid.maturity(i);
        for (std::size_t j = 0; j <= s.grid.J; ++j) {
            s.at(i, j) = std::max(std::exp(-0.02 * T) - s.grid.strike(j) * std::exp(-0.05 * T), 0.0);
        }
    }
    try {
        const LocalVolGrid lv = extract_local_vol(s, kMk);
        std::size_t valid = 0;
        for (std::size_t i = 1; i <= s.grid.I; ++i)
            for (std::size_t j = 1; j < s.grid.J; ++j) valid += lv.is_valid(i, j);
        EXPECT_LE(valid, 2 * s.grid.I);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), errc::surface_not_convex);
    }
}

TEST(SurfaceCsv, RoundTripBitExact) {
    const PideGrid g = PideGrid::around(1.0, 0.3, 1.0, 40, 10, 6.0);
    const PideSurface s = solve_dupire_surface(kConst, LevyMeasure::single_atom(1.0, -0.1), kMk, g);
    std::stringstream a;
    write_surface_csv(s, a);
    const std::string text = a.str();
    EXPECT_EQ(text.substr(0, 15), "T,strike,value\n");
    std::istringstream in(text);
    const PideSurface r = read_surface_csv(in, SurfaceKind::call, 1.0);
    EXPECT_EQ(r.values, s.values);
    std::stringstream b;
    write_surface_csv(r, b);
    EXPECT_EQ(b.str(), text);
}
