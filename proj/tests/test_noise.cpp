#include <gtest/gtest.h>

#include <cmath>

#include "flowdual/noise.hpp"
#include "flowdual/parallel.hpp"

using namespace flowdual;

namespace {
const LevyMeasure kAtoms = LevyMeasure::atomic(3.0, {{-0.2, 0.5}, {0.15, 0.5}});
}

TEST(Noise, Deterministic) {
    const TimeGrid g(1.0, 16);
    EXPECT_EQ(generate_noise(g, kAtoms, 5, 17), generate_noise(g, kAtoms, 5, 17));
    EXPECT_NE(generate_noise(g, kAtoms, 5, 17).increments, generate_noise(g, kAtoms, 5, 18).increments);
    EXPECT_TRUE(generate_noise(g, LevyMeasure::zero(), 5, 3).jumps.empty());
}

TEST(Noise, IncrementVariance) {
    const TimeGrid g(0.7, 1);
    const std::size_t n = 100000;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = generate_noise(g, LevyMeasure::zero(), 9, i).increments[0];
        sq[i] = w * w;
    }
    const SampleStats s = sample_stats(sq);
    EXPECT_LE(std::abs(s.mean - 0.7), 3.0 * s.std_error);
}

TEST(Noise, PathsUncorrelated) {
    const TimeGrid g(1.0, 1);
    const std::size_t n = 10000;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = generate_noise(g, LevyMeasure::zero(), 1, 2 * i).increments[0];
        const double b = generate_noise(g, LevyMeasure::zero(), 1, 2 * i + 1).increments[0];
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.02);
}

TEST(Noise, ReverseDefinition) {
    NoiseBundle b;
    b.grid = TimeGrid(1.0, 2);
    b.increments = {0.3, -0.7};
    b.jumps = {{0.3, 0.1, 0.0, b.grid.cell_of(0.3)}};
    b.jump_intensity = 1.0;
    const NoiseBundle r = reverse_noise(b);
    EXPECT_EQ(r.increments, (std::vector<double>{0.7, -0.3}));
    ASSERT_EQ(r.jumps.size(), 1u);
    EXPECT_DOUBLE_EQ(r.jumps[0].time, 0.7);
    EXPECT_DOUBLE_EQ(r.jumps[0].size, -0.1);
    EXPECT_EQ(r.jumps[0].cell, 1u);
    EXPECT_EQ(r.direction, Direction::reversed);
}

TEST(Noise, ReverseIsInvolution) {
    const TimeGrid g(1.3, 37);
    for (std::size_t p = 0; p < 20; ++p) {
        const NoiseBundle b = generate_noise(g, kAtoms, 2, p);
        const NoiseBundle rr = reverse_noise(reverse_noise(b));
        EXPECT_EQ(rr.increments, b.increments);
        EXPECT_EQ(rr.direction, b.direction);
        ASSERT_EQ(rr.jumps.size(), b.jumps.size());
        for (std::size_t i = 0; i < b.jumps.size(); ++i) {
            EXPECT_NEAR(rr.jumps[i].time, b.jumps[i].time, 1e-15);
            EXPECT_EQ(rr.jumps[i].size, b.jumps[i].size);
            EXPECT_EQ(rr.jumps[i].cell, b.jumps[i].cell);
        }
    }
}

TEST(Noise, LevyPathValues) {
    NoiseBundle b;
    b.grid = TimeGrid(1.0, 4);
    b.increments.assign(4, 0.0);
    const auto m = LevyMeasure::single_atom(1.0, -0.1);
    b.jump_intensity = 1.0;
    b.jumps = {{0.6, -0.1, 0.0, b.grid.cell_of(0.6)}};
    const LevyProcessSpec spec{m, Direction::forward};
    EXPECT_NEAR(levy_path_value(b, spec, 4), -0.1 - m.k1(), 1e-15);
    EXPECT_NEAR(levy_path_value(b, spec, 2), -0.5 * m.k1(), 1e-15);

    const NoiseBundle z = generate_noise(b.grid, LevyMeasure::zero(), 1, 0);
    for (std::size_t k = 0; k <= 4; ++k) {
        EXPECT_EQ(levy_path_value(z, {LevyMeasure::zero(), Direction::forward}, k), 0.0);
    }
    EXPECT_THROW(levy_path_value(b, spec, 5), Error);
    EXPECT_THROW(levy_path_value(b, {m, Direction::reversed}, 1), Error);
    EXPECT_THROW(levy_path_value(b, {kAtoms, Direction::forward}, 1), Error);
}

TEST(Noise, ReversalIdentityOnGrid) {
    const TimeGrid g(1.0, 50);
    const LevyProcessSpec fwd{kAtoms, Direction::forward};
    const LevyProcessSpec rev{reflect(kAtoms), Direction::reversed};
    for (std::size_t p = 0; p < 25; ++p) {
        const NoiseBundle b = generate_noise(g, kAtoms, 4, p);
        const NoiseBundle r = reverse_noise(b);
        const double LT = levy_path_value(b, fwd, g.steps);
        for (std::size_t k = 0; k <= g.steps; ++k) {
            EXPECT_NEAR(levy_path_value(r, rev, k), levy_path_value(b, fwd, g.steps - k) - LT, 1e-14);
        }
    }
}

TEST(Noise, WorkerCountIndependence) {
    const TimeGrid g(1.0, 8);
    auto draw = [&](unsigned w) {
        return parallel_map(64, w, [&](std::size_t i) { return generate_noise(g, kAtoms, 3, i); });
    };
    EXPECT_EQ(draw(1), draw(4));
}

TEST(Noise, CoarsenSumsIncrements) {
    const TimeGrid g(1.0, 8);
    const NoiseBundle b = generate_noise(g, kAtoms, 3, 1);
    const NoiseBundle c = coarsen_noise(b, 4);
    ASSERT_EQ(c.increments.size(), 2u);
    EXPECT_NEAR(c.increments[0], b.increments[0] + b.increments[1] + b.increments[2] + b.increments[3], 1e-15);
    EXPECT_THROW(coarsen_noise(b, 3), Error);
}

TEST(Noise, TwoAssetBundle) {
    JointLevyMeasure jm{LevyMeasure::single_atom(1.0, 0.1), LevyMeasure::zero(), 2.0, {{-0.1, -0.2, 1.0}}};
    const NoiseBundle b = generate_two_asset_noise(TimeGrid(1.0, 10), jm, 1, 3);
    EXPECT_TRUE(b.two_asset());
    EXPECT_EQ(b.increments_second.size(), 10u);
    const NoiseBundle r = reverse_noise(b);
    EXPECT_EQ(r.increments_second.front(), -b.increments_second.back());
}
