#pragma once

// Two-asset model with correlated Brownian drivers and joint jumps: forward
// basket / best-of prices, their dual representations through the
// w(z1, z2) = e^{-rT} P(x1 >= Z^{1,z1}_T, x2 >= Z^{2,z2}_T) surface, and a
// lognormal double-quadrature oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "flowdual/error.hpp"
#include "flowdual/flow.hpp"
#include "flowdual/levy.hpp"
#include "flowdual/noise.hpp"
#include "flowdual/parallel.hpp"
#include "flowdual/pricing.hpp"
#include "flowdual/volmodel.hpp"

namespace flowdual {

/// Constant rho, or the state function rho0 + rho1 tanh(ln(x1 / x2)).
struct Correlation {
    enum class Kind { constant, state };
    Kind kind = Kind::constant;
    double rho0 = 0.0;
    double rho1 = 0.0;

    static Correlation constant(double rho) { return {Kind::constant, rho, 0.0}; }
    static Correlation state(double rho0, double rho1) { return {Kind::state, rho0, rho1}; }

    double at(double x1, double x2) const {
        if (kind == Kind::constant) return rho0;
        return rho0 + rho1 * std::tanh(std::log(x1 / x2));
    }

    void validate() const {
        const double bound = std::abs(rho0) + (kind == Kind::state ? std::abs(rho1) : 0.0);
        if (!std::isfinite(bound) || bound > 1.0) {
            throw Error(errc::invalid_correlation, "correlation must stay within [-1, 1]");
        }
    }
};

struct TwoAssetParams {
    VolModel vol1;
    VolModel vol2;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double x1 = 1.0;
    double x2 = 1.0;
    JointLevyMeasure jumps;
    Correlation corr;

    void validate() const {
        corr.validate();
        jumps.validate();
        if (!(x1 > 0.0) || !(x2 > 0.0)) throw Error(errc::invalid_config, "spots must be > 0");
        if (!std::isfinite(delta1) || !std::isfinite(delta2)) {
            throw Error(errc::invalid_config, "dividend rates must be finite");
        }
    }
};

enum class TwoAssetPayoff { basket_call, best_of_call, w_point };

struct DualGridOptions {
    /// Quadrature nodes on [0, y]; the same spacing continues up to z_max.
    std::size_t nodes_per_strike = 128;
    /// Pilot paths used to place z_max beyond the simulated terminal values.
    std::size_t pilot_paths = 20000;
    double z_max_factor = 1.5;
};

struct TwoAssetResult {
    McEstimate forward;
    McEstimate dual;
    /// Paired standard error of (forward - dual) when both sides share noise.
    double coupled_diff_se = std::numeric_limits<double>::quiet_NaN();
    bool coupled = false;
    double z_max = 0.0;
    /// Fraction of dual paths whose threshold reached z_max.
    double truncation_fraction = 0.0;
};

namespace detail {

struct JointPath {
    double x1 = 0.0, x2 = 0.0;
    /// Realized increments of W^2 (only when requested).
    std::vector<double> dw2;
};

inline JointPath simulate_joint(const TwoAssetParams& p, double r, const NoiseBundle& b,
                                bool keep_dw2) {
    const std::size_t n = b.grid.steps;
    const double dt = b.grid.dt();
    const double k1a = p.jumps.k1(0), k1b = p.jumps.k1(1);
    double u = std::log(p.x1), v = std::log(p.x2);
    JointPath out;
    if (keep_dw2) out.dw2.resize(n);
    auto jump = b.jumps.begin();
    for (std::size_t k = 0; k < n; ++k) {
        const double t = b.grid.time(k);
        const double a = std::exp(u), c = std::exp(v);
        const double s1 = p.vol1.sigma(t, a), s2 = p.vol2.sigma(t, c);
        const double rho = p.corr.at(a, c);
        const double w1 = b.increments[k];
        const double w2 = rho * w1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * b.increments_second[k];
        if (keep_dw2) out.dw2[k] = w2;
        u += s1 * w1 + (r - p.delta1 - 0.5 * s1 * s1 - k1a) * dt;
        v += s2 * w2 + (r - p.delta2 - 0.5 * s2 * s2 - k1b) * dt;
        for (; jump != b.jumps.end() && jump->cell == k; ++jump) {
            u += jump->size;
            v += jump->size_second;
        }
    }
    out.x1 = std::exp(u);
    out.x2 = std::exp(v);
    return out;
}

/// Single-asset view of coordinate i of a two-asset bundle with W^i increments `dw`.
inline NoiseBundle component(const NoiseBundle& b, std::vector<double> dw, int i) {
    NoiseBundle c;
    c.grid = b.grid;
    c.direction = b.direction;
    c.jump_intensity = b.jump_intensity;
    c.increments = std::move(dw);
    for (const JumpEvent& j : b.jumps) {
        const double s = i == 0 ? j.size : j.size_second;
        if (s != 0.0) c.jumps.push_back({j.time, s, 0.0, j.cell});
    }
    return c;
}

/// Largest k in [0, K] with x >= Z^{k h}_T (k = 0 always qualifies).
template <class Backward>
std::size_t threshold_index(double x, std::size_t K, double h, Backward&& z_of) {
    if (!(x >= z_of(h))) return 0;
    std::size_t lo = 1, hi = K;
    if (x >= z_of(static_cast<double>(hi) * h)) return hi;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (x >= z_of(static_cast<double>(mid) * h)) lo = mid; else hi = mid;
    }
    return lo;
}

inline double trapezoid_weight(std::size_t k, std::size_t lo, std::size_t hi) {
    return (k == lo || k == hi) ? 0.5 : 1.0;
}

/// Basket integral int_0^y 1{k1 >= z, k2 >= y - z} dz + int_y^zmax (1{k1 >= z} + 1{k2 >= z}) dz
/// on nodes z_k = k h, with k_i the threshold indices and y = N h.
inline double basket_integral(std::size_t k1, std::size_t k2, std::size_t N, std::size_t K,
                              double h) {
    double s = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
        if (k <= k1 && N - k <= k2) s += trapezoid_weight(k, 0, N);
    }
    for (std::size_t k = N; k <= K; ++k) {
        s += trapezoid_weight(k, N, K) * ((k <= k1 ? 1.0 : 0.0) + (k <= k2 ? 1.0 : 0.0));
    }
    return s * h;
}

/// int_y^zmax 1{max(k1, k2) >= z} dz on the same nodes.
inline double best_of_integral(std::size_t k1, std::size_t k2, std::size_t N, std::size_t K,
                               double h) {
    double s = 0.0;
    for (std::size_t k = N; k <= K; ++k) {
        if (k <= std::max(k1, k2)) s += trapezoid_weight(k, N, K);
    }
    return s * h;
}

}  // namespace detail

struct TwoAssetAll {
    TwoAssetResult basket;
    TwoAssetResult best_of;
};

/// Basket and best-of priced forward and through the w-surface. Each dual
/// path shares one reversed bundle across all z nodes and finds, by
/// bisection on the monotone map z -> Z^z_T, the last node with x_i >= Z^{i,z}_T.
/// Constant rho draws the dual side from independent noise; state-dependent
/// rho couples it to the forward path's realized W^2 increments.
inline TwoAssetAll mc_two_asset_all(const TwoAssetParams& p, const MarketParams& mk,
                                    const SimConfig& sim, DualGridOptions opt = {}) {
    p.validate();
    mk.validate();
    sim.validate();
    if (!(mk.y > 0.0)) throw Error(errc::invalid_config, "two-asset strike must be > 0");
    if (opt.nodes_per_strike < 2) throw Error(errc::invalid_config, "need >= 2 quadrature nodes");
    const TimeGrid grid(mk.T, sim.steps);
    const double disc = std::exp(-mk.r * mk.T);
    const bool coupled = p.corr.kind == Correlation::Kind::state;

    const auto pilot = parallel_map(std::min(opt.pilot_paths, sim.paths), sim.workers,
                                    [&](std::size_t i) {
        const auto j = detail::simulate_joint(
            p, mk.r, generate_two_asset_noise(grid, p.jumps, sim.seed, i, family::pilot), false);
        return std::max(j.x1, j.x2);
    });
    const double top = *std::max_element(pilot.begin(), pilot.end());
    const double z_max = std::max(2.0 * mk.y, opt.z_max_factor * top);
    const std::size_t N = opt.nodes_per_strike;
    const double h = mk.y / static_cast<double>(N);
    const auto K = static_cast<std::size_t>(std::ceil(z_max / h));

    const JumpTerms jt1{p.jumps.k1(0), p.jumps.first.intensity() + p.jumps.second.intensity() +
                                           p.jumps.common_intensity};
    const JumpTerms jt2{p.jumps.k1(1), jt1.intensity};
    const DriftSpec d1 = DriftSpec::rate_gap(mk.r - p.delta1);
    const DriftSpec d2 = DriftSpec::rate_gap(mk.r - p.delta2);
    const double rho = p.corr.rho0;
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    struct PathValues {
        double basket_fwd = 0.0, best_fwd = 0.0, basket_dual = 0.0, best_dual = 0.0;
        bool truncated = false;
    };
    const auto rows = parallel_map(sim.paths, sim.workers, [&](std::size_t i) {
        PathValues out;
        const NoiseBundle fb = generate_two_asset_noise(grid, p.jumps, sim.seed, i, family::forward);
        const auto fwd = detail::simulate_joint(p, mk.r, fb, coupled);
        out.basket_fwd = disc * std::max(fwd.x1 + fwd.x2 - mk.y, 0.0);
        out.best_fwd = disc * std::max(std::max(fwd.x1, fwd.x2) - mk.y, 0.0);

        NoiseBundle c1, c2;
        if (coupled) {
            c1 = reverse_noise(detail::component(fb, fb.increments, 0));
            c2 = reverse_noise(detail::component(fb, fwd.dw2, 1));
        } else {
            const NoiseBundle rb = reverse_noise(
                generate_two_asset_noise(grid, p.jumps, sim.seed, i, family::dual));
            std::vector<double> w2(rb.increments.size());
            for (std::size_t k = 0; k < w2.size(); ++k) {
                w2[k] = rho * rb.increments[k] + rho_c * rb.increments_second[k];
            }
            c1 = detail::component(rb, rb.increments, 0);
            c2 = detail::component(rb, std::move(w2), 1);
        }
        auto z1 = [&](double z) { return simulate_backward(z, p.vol1, d1, jt1, c1).terminal; };
        auto z2 = [&](double z) { return simulate_backward(z, p.vol2, d2, jt2, c2).terminal; };
        const std::size_t k1 = detail::threshold_index(p.x1, K, h, z1);
        const std::size_t k2 = detail::threshold_index(p.x2, K, h, z2);
        out.truncated = k1 == K || k2 == K;
        out.basket_dual = disc * detail::basket_integral(k1, k2, N, K, h);
        out.best_dual = disc * detail::best_of_integral(k1, k2, N, K, h);
        return out;
    });

    auto build = [&](auto fwd_of, auto dual_of) {
        std::vector<double> f(rows.size()), d(rows.size()), diff(rows.size());
        std::size_t trunc = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            f[i] = fwd_of(rows[i]);
            d[i] = dual_of(rows[i]);
            diff[i] = f[i] - d[i];
            trunc += rows[i].truncated ? 1 : 0;
        }
        const SampleStats sf = sample_stats(f), sd = sample_stats(d), sdiff = sample_stats(diff);
        TwoAssetResult r;
        r.forward = {sf.mean, sf.std_error, sim.paths, sim.steps, sim.seed};
        r.dual = {sd.mean, sd.std_error, sim.paths, sim.steps, sim.seed};
        r.coupled = coupled;
        r.coupled_diff_se = sdiff.std_error;
        r.z_max = static_cast<double>(K) * h;
        r.truncation_fraction = static_cast<double>(trunc) / static_cast<double>(rows.size());
        return r;
    };
    return {build([](const PathValues& v) { return v.basket_fwd; },
                  [](const PathValues& v) { return v.basket_dual; }),
            build([](const PathValues& v) { return v.best_fwd; },
                  [](const PathValues& v) { return v.best_dual; })};
}

/// Forward e^{-rT} P(X1_T >= z1, X2_T >= z2) against e^{-rT} P(x1 >= Z1, x2 >= Z2).
inline TwoAssetResult mc_two_asset_w(const TwoAssetParams& p, const MarketParams& mk,
                                     const SimConfig& sim, double z1, double z2) {
    p.validate();
    mk.validate();
    sim.validate();
    if (!(z1 > 0.0) || !(z2 > 0.0)) throw Error(errc::invalid_config, "w needs z1, z2 > 0");
    const TimeGrid grid(mk.T, sim.steps);
    const double disc = std::exp(-mk.r * mk.T);
    const JumpTerms jt1{p.jumps.k1(0), p.jumps.first.intensity() + p.jumps.second.intensity() +
                                           p.jumps.common_intensity};
    const JumpTerms jt2{p.jumps.k1(1), jt1.intensity};
    const double rho = p.corr.rho0;
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const bool coupled = p.corr.kind == Correlation::Kind::state;
    const auto rows = parallel_map(sim.paths, sim.workers, [&](std::size_t i) {
        const NoiseBundle fb = generate_two_asset_noise(grid, p.jumps, sim.seed, i, family::forward);
        const auto fwd = detail::simulate_joint(p, mk.r, fb, coupled);
        NoiseBundle c1, c2;
        if (coupled) {
            c1 = reverse_noise(detail::component(fb, fb.increments, 0));
            c2 = reverse_noise(detail::component(fb, fwd.dw2, 1));
        } else {
            const NoiseBundle rb = reverse_noise(
                generate_two_asset_noise(grid, p.jumps, sim.seed, i, family::dual));
            std::vector<double> w2(rb.increments.size());
            for (std::size_t k = 0; k < w2.size(); ++k) {
                w2[k] = rho * rb.increments[k] + rho_c * rb.increments_second[k];
            }
            c1 = detail::component(rb, rb.increments, 0);
            c2 = detail::component(rb, std::move(w2), 1);
        }
        const double zz1 =
            simulate_backward(z1, p.vol1, DriftSpec::rate_gap(mk.r - p.delta1), jt1, c1).terminal;
        const double zz2 =
            simulate_backward(z2, p.vol2, DriftSpec::rate_gap(mk.r - p.delta2), jt2, c2).terminal;
        return std::pair{fwd.x1 >= z1 && fwd.x2 >= z2 ? disc : 0.0,
                         p.x1 >= zz1 && p.x2 >= zz2 ? disc : 0.0};
    });
    std::vector<double> f, d, diff;
    for (const auto& [a, b] : rows) {
        f.push_back(a);
        d.push_back(b);
        diff.push_back(a - b);
    }
    const SampleStats sf = sample_stats(f), sd = sample_stats(d), sdiff = sample_stats(diff);
    TwoAssetResult r;
    r.forward = {sf.mean, sf.std_error, sim.paths, sim.steps, sim.seed};
    r.dual = {sd.mean, sd.std_error, sim.paths, sim.steps, sim.seed};
    r.coupled = coupled;
    r.coupled_diff_se = sdiff.std_error;
    return r;
}

/// Selects one payoff of mc_two_asset_all (w_point uses mk.z for both coordinates).
inline TwoAssetResult mc_two_asset(TwoAssetPayoff payoff, const TwoAssetParams& p,
                                   const MarketParams& mk, const SimConfig& sim,
                                   DualGridOptions opt = {}) {
    if (payoff == TwoAssetPayoff::w_point) return mc_two_asset_w(p, mk, sim, mk.z, mk.z);
    const TwoAssetAll all = mc_two_asset_all(p, mk, sim, opt);
    return payoff == TwoAssetPayoff::basket_call ? all.basket : all.best_of;
}

/// e^{-rT} E[payoff] for independent lognormal assets (rho = 0, no jumps,
/// constant sigma_i) by nested Gauss-Kronrod quadrature over the two
/// standard normal drivers, split at the payoff kinks.
inline double lognormal_two_asset_quadrature(TwoAssetPayoff payoff, double sigma1, double sigma2,
                                             const TwoAssetParams& p, const MarketParams& mk) {
    using boost::math::quadrature::gauss_kronrod;
    if (payoff == TwoAssetPayoff::w_point) {
        throw Error(errc::invalid_config, "quadrature oracle covers basket and best-of only");
    }
    const double sq = std::sqrt(mk.T);
    const double m1 = std::log(p.x1) + (mk.r - p.delta1 - 0.5 * sigma1 * sigma1) * mk.T;
    const double m2 = std::log(p.x2) + (mk.r - p.delta2 - 0.5 * sigma2 * sigma2) * mk.T;
    const double inf = std::numeric_limits<double>::infinity();
    auto u2_of = [&](double level) { return (std::log(level) - m2) / (sigma2 * sq); };
    auto pay = [&](double a, double b) {
        return payoff == TwoAssetPayoff::basket_call ? std::max(a + b - mk.y, 0.0)
                                                     : std::max(std::max(a, b) - mk.y, 0.0);
    };
    auto integrate = [](auto&& f, double lo, double hi) {
        if (!(hi > lo)) return 0.0;
        return gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-13);
    };
    auto inner = [&](double u1) {
        if (detail::normal_pdf(u1) == 0.0 || std::abs(u1) > 38.0) return 0.0;
        const double a = std::exp(m1 + sigma1 * sq * u1);
        auto g = [&](double u2) {
            if (std::abs(u2) > 38.0) return 0.0;
            return pay(a, std::exp(m2 + sigma2 * sq * u2)) * detail::normal_pdf(u2);
        };
        std::vector<double> cuts{-inf, inf};
        if (payoff == TwoAssetPayoff::basket_call) {
            if (mk.y > a) cuts.push_back(u2_of(mk.y - a));
        } else {
            cuts.push_back(u2_of(mk.y));
            cuts.push_back(u2_of(a));
        }
        std::sort(cuts.begin(), cuts.end());
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += integrate(g, cuts[i], cuts[i + 1]);
        return s * detail::normal_pdf(u1);
    };
    // The inner integral has a kink in u1 where X1 = y.
    const double c = (std::log(mk.y) - m1) / (sigma1 * sq);
    const double total = integrate(inner, -inf, c) + integrate(inner, c, inf);
    return std::exp(-mk.r * mk.T) * total;
}

}  // namespace flowdual
