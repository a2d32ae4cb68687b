#pragma once

// Per-path driving noise (Brownian increments + Poisson jump events) on a
// uniform grid, and its exact pathwise time reversal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "flowdual/error.hpp"
#include "flowdual/levy.hpp"
#include "flowdual/rng.hpp"

namespace flowdual {

struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 1;

    TimeGrid() = default;
    TimeGrid(double horizon_, std::size_t steps_) : horizon(horizon_), steps(steps_) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw Error(errc::invalid_config, "time horizon must be > 0");
        }
        if (steps < 1) throw Error(errc::invalid_config, "need at least one time step");
    }

    double dt() const { return horizon / static_cast<double>(steps); }
    double time(std::size_t k) const {
        return k == steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(steps);
    }

    /// Cell index k with t in (t_k, t_{k+1}]; a jump there acts at the end of step k.
    std::size_t cell_of(double t) const {
        const double c = std::ceil(t / dt());
        if (c <= 1.0) return 0;
        return std::min(steps - 1, static_cast<std::size_t>(c) - 1);
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// A jump event. `size` drives the first (or only) asset, `size_second` the
/// second asset of a two-asset bundle. `cell` is the grid step at whose end
/// the jump is applied.
struct JumpEvent {
    double time = 0.0;
    double size = 0.0;
    double size_second = 0.0;
    std::size_t cell = 0;

    friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

struct NoiseBundle {
    TimeGrid grid;
    std::vector<double> increments;
    /// Independent second Brownian increments (two-asset use only).
    std::vector<double> increments_second;
    std::vector<JumpEvent> jumps;
    Direction direction = Direction::forward;
    /// Total intensity of the measure the jumps were drawn from.
    double jump_intensity = 0.0;

    bool two_asset() const { return !increments_second.empty(); }

    /// Sum of jump sizes acting at the end of each step.
    std::vector<double> jump_sums(int coordinate = 0) const {
        std::vector<double> out(grid.steps, 0.0);
        for (const JumpEvent& j : jumps) out[j.cell] += coordinate == 0 ? j.size : j.size_second;
        return out;
    }

    friend bool operator==(const NoiseBundle&, const NoiseBundle&) = default;
};

namespace detail {

inline std::vector<double> gaussian_increments(std::mt19937_64 eng, const TimeGrid& grid) {
    std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
    std::vector<double> out(grid.steps);
    for (double& v : out) v = normal(eng);
    return out;
}

inline void sort_jumps(std::vector<JumpEvent>& jumps) {
    std::sort(jumps.begin(), jumps.end(), [](const JumpEvent& a, const JumpEvent& b) {
        return a.cell != b.cell ? a.cell < b.cell : a.time < b.time;
    });
}

}  // namespace detail

/// Noise for one path; a pure function of (grid, measure, seed, family, path_index).
inline NoiseBundle generate_noise(const TimeGrid& grid, const LevyMeasure& measure,
                                  std::uint64_t seed, std::uint64_t path_index,
                                  std::uint64_t fam = family::forward) {
    NoiseBundle b;
    b.grid = grid;
    b.increments = detail::gaussian_increments(
        substream::engine(seed, fam, path_index, substream::brownian), grid);
    auto eng = substream::engine(seed, fam, path_index, substream::jumps);
    for (const JumpSample& s : sample_jumps(measure, grid.horizon, eng)) {
        b.jumps.push_back({s.time, s.size, 0.0, grid.cell_of(s.time)});
    }
    detail::sort_jumps(b.jumps);
    b.jump_intensity = measure.intensity();
    return b;
}

/// Two independent Brownian increment arrays plus joint jumps from m(dl1, dl2).
inline NoiseBundle generate_two_asset_noise(const TimeGrid& grid, const JointLevyMeasure& measure,
                                            std::uint64_t seed, std::uint64_t path_index,
                                            std::uint64_t fam = family::forward) {
    NoiseBundle b;
    b.grid = grid;
    b.increments = detail::gaussian_increments(
        substream::engine(seed, fam, path_index, substream::brownian), grid);
    b.increments_second = detail::gaussian_increments(
        substream::engine(seed, fam, path_index, substream::brownian_second), grid);
    auto eng = substream::engine(seed, fam, path_index, substream::jumps);
    for (const JumpSample& s : sample_jumps(measure.first, grid.horizon, eng)) {
        b.jumps.push_back({s.time, s.size, 0.0, grid.cell_of(s.time)});
    }
    for (const JumpSample& s : sample_jumps(measure.second, grid.horizon, eng)) {
        b.jumps.push_back({s.time, 0.0, s.size, grid.cell_of(s.time)});
    }
    if (measure.common_intensity > 0.0) {
        std::vector<Atom> index_atoms;
        for (std::size_t i = 0; i < measure.common_atoms.size(); ++i) {
            index_atoms.push_back({static_cast<double>(i), measure.common_atoms[i].weight});
        }
        const LevyMeasure selector = LevyMeasure::atomic(measure.common_intensity, index_atoms);
        for (const JumpSample& s : sample_jumps(selector, grid.horizon, eng)) {
            const JointAtom& a = measure.common_atoms[static_cast<std::size_t>(s.size)];
            b.jumps.push_back({s.time, a.first, a.second, grid.cell_of(s.time)});
        }
    }
    detail::sort_jumps(b.jumps);
    b.jump_intensity = measure.first.intensity() + measure.second.intensity() +
                       measure.common_intensity;
    return b;
}

/// Time reversal: W-hat_t = W_{T-t} - W_T and jumps (t, l) -> (T - t, -l).
/// Increment k of the result is minus forward increment n-1-k; a jump in
/// forward cell c lands in reversed cell n-1-c.
inline NoiseBundle reverse_noise(const NoiseBundle& b) {
    NoiseBundle r;
    r.grid = b.grid;
    r.direction = flipped(b.direction);
    r.jump_intensity = b.jump_intensity;
    const std::size_t n = b.grid.steps;
    auto flip = [](const std::vector<double>& in) {
        std::vector<double> out(in.rbegin(), in.rend());
        for (double& v : out) v = -v;
        return out;
    };
    r.increments = flip(b.increments);
    if (b.two_asset()) r.increments_second = flip(b.increments_second);
    r.jumps.reserve(b.jumps.size());
    for (const JumpEvent& j : b.jumps) {
        r.jumps.push_back({b.grid.horizon - j.time, -j.size, -j.size_second, n - 1 - j.cell});
    }
    detail::sort_jumps(r.jumps);
    return r;
}

/// Same path on a grid `factor` times coarser (increments summed, jump cells merged).
inline NoiseBundle coarsen_noise(const NoiseBundle& b, std::size_t factor) {
    if (factor == 0 || b.grid.steps % factor != 0) {
        throw Error(errc::invalid_config, "coarsening factor must divide the step count");
    }
    NoiseBundle c;
    c.grid = TimeGrid(b.grid.horizon, b.grid.steps / factor);
    c.direction = b.direction;
    c.jump_intensity = b.jump_intensity;
    auto sum = [&](const std::vector<double>& in) {
        std::vector<double> out(c.grid.steps, 0.0);
        for (std::size_t k = 0; k < in.size(); ++k) out[k / factor] += in[k];
        return out;
    };
    c.increments = sum(b.increments);
    if (b.two_asset()) c.increments_second = sum(b.increments_second);
    c.jumps = b.jumps;
    for (JumpEvent& j : c.jumps) j.cell /= factor;
    return c;
}

/// L_{t_k} for a forward bundle, or L-hat_{t_k} = L_{T - t_k} - L_T for a
/// reversed one. `spec.measure` is m for the forward process and the
/// reflected measure m-hat for the reversed one.
inline double levy_path_value(const NoiseBundle& b, const LevyProcessSpec& spec, std::size_t k) {
    if (k > b.grid.steps) throw Error(errc::domain, "grid index out of range");
    if (spec.direction != b.direction) {
        throw Error(errc::direction_mismatch, "process direction differs from bundle direction");
    }
    if (spec.measure.intensity() != b.jump_intensity) {
        throw Error(errc::noise_mismatch, "bundle was not generated from this measure");
    }
    double jumps = 0.0;
    for (const JumpEvent& j : b.jumps) {
        if (j.cell < k) jumps += j.size;
    }
    const double t = b.grid.time(k);
    if (spec.direction == Direction::forward) return jumps - t * spec.measure.k1();
    return jumps + t * reflect(spec.measure).k1();
}

}  // namespace flowdual
