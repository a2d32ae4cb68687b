#pragma once

// Forward flow X, backward inverse flow Z, time-reversed dual process Y and
// the derivative flow dX_T/dx, all integrated in log coordinates.
//
// One log step of the forward scheme reads
//   ln X_{k+1} = ln X_k + sigma dW_k + (beta - sigma^2/2) dt + sum(jumps in cell k) - k1 dt
// with coefficients frozen at (t_k, X_k). The backward scheme runs on the
// reversed bundle with sigma evaluated at (T - t_k, Z_k), log drift
// sigma d(eta) - beta - sigma^2/2 and compensator +k1 dt; reversed jumps act
// at the start of their cell so each backward step undoes one forward step.
// For constant coefficients the two maps are exact inverses of each other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "flowdual/error.hpp"
#include "flowdual/levy.hpp"
#include "flowdual/noise.hpp"
#include "flowdual/parallel.hpp"
#include "flowdual/volmodel.hpp"

namespace flowdual {

/// log_milstein adds 1/2 a a' (dW^2 - dt) in log coordinates; it has no effect
/// when sigma does not depend on x.
enum class Scheme { log_euler, log_milstein };

enum class DriftKind { constant_rate_gap, binary_dual, custom };

/// The relative drift beta(t, x) of the forward flow.
struct DriftSpec {
    DriftKind kind = DriftKind::constant_rate_gap;
    /// r - delta for constant_rate_gap and binary_dual.
    double gamma = 0.0;
    TanhProfile profile{};

    static DriftSpec rate_gap(double gamma) { return {DriftKind::constant_rate_gap, gamma, {}}; }

    /// beta = sigma d(eta) + (r - delta), which turns the backward drift into (delta - r).
    static DriftSpec binary_dual(double r, double delta) {
        return {DriftKind::binary_dual, r - delta, {}};
    }

    static DriftSpec custom(TanhProfile p) {
        if (!(p.anchor > 0.0)) throw Error(errc::invalid_config, "custom drift needs anchor > 0");
        return {DriftKind::custom, 0.0, p};
    }

    bool is_constant() const { return kind == DriftKind::constant_rate_gap; }

    /// (beta, d beta / dx) at (t, x).
    std::pair<double, double> eval(const VolModel& vol, double t, double x,
                                   const VolValues& v) const {
        switch (kind) {
            case DriftKind::constant_rate_gap: return {gamma, 0.0};
            case DriftKind::binary_dual: {
                const double d2eta = 2.0 * v.dsigma + x * vol.d2sigma(t, x);
                return {v.sigma * v.deta + gamma, v.dsigma * v.deta + v.sigma * d2eta};
            }
            case DriftKind::custom: return {profile.value(t, x), profile.dx(t, x)};
        }
        return {0.0, 0.0};
    }

    /// Log drift of the backward flow: sigma d(eta) - beta - sigma^2/2.
    double backward_log_drift(double t, double x, const VolValues& v) const {
        if (kind == DriftKind::binary_dual) return -gamma - 0.5 * v.sigma * v.sigma;
        const double beta = kind == DriftKind::custom ? profile.value(t, x) : gamma;
        return v.sigma * v.deta - beta - 0.5 * v.sigma * v.sigma;
    }
};

/// Compensator k1 = int (e^l - 1) m(dl) of the forward measure and the
/// intensity the consumed bundle's jumps must have been drawn with.
struct JumpTerms {
    double kappa1 = 0.0;
    double intensity = 0.0;
};

inline JumpTerms jump_terms(const LevyMeasure& m) { return {m.k1(), m.intensity()}; }

/// Terms for the dual process Y, whose jumps come from the tilted measure e^l m(dl).
inline JumpTerms tilted_jump_terms(const LevyMeasure& m) {
    return {m.k1(), m.is_zero() ? 0.0 : m.tilted_mass()};
}

struct FlowOptions {
    Scheme scheme = Scheme::log_euler;
    bool keep_path = false;
    bool derivative = false;
};

struct FlowResult {
    double terminal = 0.0;
    /// Values at grid indices 0..n when requested (time index of the bundle's direction).
    std::vector<double> path;
    /// dX_T/dx when requested (forward flow only).
    double derivative = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_bundle(const NoiseBundle& b, Direction expected, double intensity) {
    if (b.direction != expected) {
        throw Error(errc::direction_mismatch, expected == Direction::forward
                                                  ? "forward flow needs a forward bundle"
                                                  : "backward flow needs a reversed bundle");
    }
    if (b.jump_intensity != intensity) {
        throw Error(errc::noise_mismatch, "bundle jumps were drawn from a different measure");
    }
    if (b.increments.size() != b.grid.steps) {
        throw Error(errc::noise_mismatch, "increment count differs from grid");
    }
}

inline void check_start(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(errc::domain, "initial value must be > 0");
}

}  // namespace detail

inline FlowResult simulate_forward(double x, const VolModel& vol, const DriftSpec& drift,
                                   JumpTerms jt, const NoiseBundle& b, FlowOptions opt = {}) {
    detail::check_start(x);
    detail::check_bundle(b, Direction::forward, jt.intensity);
    const std::size_t n = b.grid.steps;
    const double dt = b.grid.dt();
    FlowResult out;
    if (opt.keep_path) {
        out.path.reserve(n + 1);
        out.path.push_back(x);
    }
    double xi = std::log(x);
    double tangent = 1.0;  // d xi_k / d xi_0
    auto jump = b.jumps.begin();
    for (std::size_t k = 0; k < n; ++k) {
        const double t = b.grid.time(k);
        const double xk = std::exp(xi);
        const VolValues v = vol.eval(t, xk);
        const auto [beta, dbeta] = drift.eval(vol, t, xk, v);
        const double dw = b.increments[k];
        const double a_x = xk * v.dsigma;  // d sigma / d xi
        double step = v.sigma * dw + (beta - 0.5 * v.sigma * v.sigma - jt.kappa1) * dt;
        double dstep = a_x * dw + xk * (dbeta - v.sigma * v.dsigma) * dt;
        if (opt.scheme == Scheme::log_milstein) {
            const double q = dw * dw - dt;
            step += 0.5 * v.sigma * a_x * q;
            if (opt.derivative) {
                const double a_xx = a_x + xk * xk * vol.d2sigma(t, xk);
                dstep += 0.5 * (a_x * a_x + v.sigma * a_xx) * q;
            }
        }
        for (; jump != b.jumps.end() && jump->cell == k; ++jump) step += jump->size;
        xi += step;
        tangent *= 1.0 + dstep;
        if (opt.keep_path) out.path.push_back(std::exp(xi));
    }
    out.terminal = std::exp(xi);
    if (opt.derivative) out.derivative = out.terminal / x * tangent;
    return out;
}

inline FlowResult simulate_forward(double x, const VolModel& vol, const DriftSpec& drift,
                                   const LevyMeasure& m, const NoiseBundle& b,
                                   FlowOptions opt = {}) {
    return simulate_forward(x, vol, drift, jump_terms(m), b, opt);
}

/// Inverse flow z -> Z^z_T on a reversed bundle. With b_rev = reverse(b),
/// x -> X^x_T (on b) and z -> Z^z_T are inverse maps up to the scheme error.
inline FlowResult simulate_backward(double z, const VolModel& vol, const DriftSpec& drift,
                                    JumpTerms jt, const NoiseBundle& b_rev, FlowOptions opt = {}) {
    detail::check_start(z);
    detail::check_bundle(b_rev, Direction::reversed, jt.intensity);
    const std::size_t n = b_rev.grid.steps;
    const double dt = b_rev.grid.dt();
    FlowResult out;
    if (opt.keep_path) {
        out.path.reserve(n + 1);
        out.path.push_back(z);
    }
    double zeta = std::log(z);
    auto jump = b_rev.jumps.begin();
    for (std::size_t k = 0; k < n; ++k) {
        // L-hat_{t+}: reversed jumps act at the start of their cell.
        for (; jump != b_rev.jumps.end() && jump->cell == k; ++jump) zeta += jump->size;
        const double s = b_rev.grid.time(n - k);  // T - t_k
        const double zk = std::exp(zeta);
        const VolValues v = vol.eval(s, zk);
        const double dw = b_rev.increments[k];
        double step = v.sigma * dw + (drift.backward_log_drift(s, zk, v) + jt.kappa1) * dt;
        if (opt.scheme == Scheme::log_milstein) {
            step += 0.5 * v.sigma * zk * v.dsigma * (dw * dw - dt);
        }
        zeta += step;
        if (opt.keep_path) out.path.push_back(std::exp(zeta));
    }
    out.terminal = std::exp(zeta);
    return out;
}

inline FlowResult simulate_backward(double z, const VolModel& vol, const DriftSpec& drift,
                                    const LevyMeasure& m, const NoiseBundle& b_rev,
                                    FlowOptions opt = {}) {
    return simulate_backward(z, vol, drift, jump_terms(m), b_rev, opt);
}

/// Dual process of the put-call duality:
///   dY = sigma(T-t, Y) Y dW-hat + (delta - r) Y dt + Y- int (e^{-l} - 1)(mu~ - e^l m(dl) dt)
/// with mu~ of intensity e^l m(dl). The bundle must be the reversal of noise
/// drawn from tilt(m), so its jump sizes are already -l.
inline FlowResult simulate_dual_Y(double y, const VolModel& vol, double r, double delta,
                                  JumpTerms jt, const NoiseBundle& b_rev_tilted,
                                  FlowOptions opt = {}) {
    detail::check_start(y);
    detail::check_bundle(b_rev_tilted, Direction::reversed, jt.intensity);
    const auto& b = b_rev_tilted;
    const std::size_t n = b.grid.steps;
    const double dt = b.grid.dt();
    FlowResult out;
    if (opt.keep_path) {
        out.path.reserve(n + 1);
        out.path.push_back(y);
    }
    // int (e^{-l} - 1) e^l m(dl) = -k1, so the log drift gains +k1.
    const double rate = delta - r + jt.kappa1;
    double upsilon = std::log(y);
    auto jump = b.jumps.begin();
    for (std::size_t k = 0; k < n; ++k) {
        const double s = b.grid.time(n - k);
        const double yk = std::exp(upsilon);
        const VolValues v = vol.eval(s, yk);
        const double dw = b.increments[k];
        double step = v.sigma * dw + (rate - 0.5 * v.sigma * v.sigma) * dt;
        if (opt.scheme == Scheme::log_milstein) {
            step += 0.5 * v.sigma * yk * v.dsigma * (dw * dw - dt);
        }
        for (; jump != b.jumps.end() && jump->cell == k; ++jump) step += jump->size;
        upsilon += step;
        if (opt.keep_path) out.path.push_back(std::exp(upsilon));
    }
    out.terminal = std::exp(upsilon);
    return out;
}

inline FlowResult simulate_dual_Y(double y, const VolModel& vol, double r, double delta,
                                  const LevyMeasure& m, const NoiseBundle& b_rev_tilted,
                                  FlowOptions opt = {}) {
    return simulate_dual_Y(y, vol, r, delta, tilted_jump_terms(m), b_rev_tilted, opt);
}

/// dX_T/dx: the exact derivative of the discrete forward map, whose exponent
///   sum ln(1 + x dsigma dW + x (dbeta - sigma dsigma) dt) + ln(X_T / x)
/// discretizes int d(eta) dW + int (beta + x dbeta - d(eta)^2/2) ds + L_T.
inline double derivative_flow(double x, const VolModel& vol, const DriftSpec& drift, JumpTerms jt,
                              const NoiseBundle& b, Scheme scheme = Scheme::log_euler) {
    return simulate_forward(x, vol, drift, jt, b, {scheme, false, true}).derivative;
}

inline double derivative_flow(double x, const VolModel& vol, const DriftSpec& drift,
                              const LevyMeasure& m, const NoiseBundle& b,
                              Scheme scheme = Scheme::log_euler) {
    return derivative_flow(x, vol, drift, jump_terms(m), b, scheme);
}

struct InverseCheckReport {
    std::size_t paths = 0;
    std::size_t pairs_checked = 0;
    std::size_t monotonicity_violations = 0;
    /// 1{X^x_T >= z} != 1{x >= Z^z_T} with |X^x_T - z| outside the tolerance band.
    std::size_t indicator_disagreements = 0;
    /// Disagreements inside the band (allowed).
    std::size_t band_disagreements = 0;
    /// max over paths, x and grid times of |Z^{X^x_T}_{n-k} - X^x_k| / X^x_k.
    double worst_inverse_error = 0.0;
    bool exact_config = false;
};

namespace detail {

struct PathInverse {
    std::size_t monotone = 0, agree_fail = 0, band = 0, pairs = 0;
    double worst = 0.0;
};

inline PathInverse inverse_on_path(std::span<const double> xs, std::span<const double> zs,
                                   const VolModel& vol, const DriftSpec& drift, JumpTerms jt,
                                   const NoiseBundle& b, Scheme scheme, bool exact) {
    PathInverse r;
    const NoiseBundle rb = reverse_noise(b);
    const std::size_t n = b.grid.steps;
    std::vector<double> xt(xs.size()), zt(zs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const FlowResult fx = simulate_forward(xs[i], vol, drift, jt, b, {scheme, true, false});
        xt[i] = fx.terminal;
        const FlowResult back =
            simulate_backward(fx.terminal, vol, drift, jt, rb, {scheme, true, false});
        for (std::size_t k = 0; k <= n; ++k) {
            r.worst = std::max(r.worst, std::abs(back.path[n - k] / fx.path[k] - 1.0));
        }
        if (i > 0 && !(xt[i] > xt[i - 1])) ++r.monotone;
    }
    for (std::size_t j = 0; j < zs.size(); ++j) {
        zt[j] = simulate_backward(zs[j], vol, drift, jt, rb, {scheme, false, false}).terminal;
        if (j > 0 && !(zt[j] > zt[j - 1])) ++r.monotone;
    }
    const double band_rel = exact ? 1e-8 : std::max(1e-8, 3.0 * r.worst);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < zs.size(); ++j) {
            ++r.pairs;
            const bool lhs = xt[i] >= zs[j];
            const bool rhs = xs[i] >= zt[j];
            if (lhs == rhs) continue;
            if (std::abs(xt[i] - zs[j]) < band_rel * zs[j]) {
                ++r.band;
            } else {
                ++r.agree_fail;
            }
        }
    }
    return r;
}

}  // namespace detail

/// Pathwise check of {X^x_T >= z} = {x >= Z^z_T}, monotonicity in the initial
/// condition and the trajectory inverse Z^{X^x_T}_{T-t} = X^x_t.
inline InverseCheckReport flow_inverse_check(std::span<const double> x_grid,
                                             std::span<const double> z_grid, const VolModel& vol,
                                             const DriftSpec& drift, const LevyMeasure& m,
                                             const TimeGrid& grid, std::uint64_t seed,
                                             std::size_t n_paths, Scheme scheme = Scheme::log_euler,
                                             unsigned workers = 1) {
    if (!std::is_sorted(x_grid.begin(), x_grid.end()) ||
        !std::is_sorted(z_grid.begin(), z_grid.end())) {
        throw Error(errc::invalid_config, "x and z grids must be sorted");
    }
    const JumpTerms jt = jump_terms(m);
    const bool exact = vol.is_constant() && drift.is_constant();
    const auto per_path = parallel_map(n_paths, workers, [&](std::size_t p) {
        return detail::inverse_on_path(x_grid, z_grid, vol, drift, jt,
                                       generate_noise(grid, m, seed, p), scheme, exact);
    });
    InverseCheckReport rep;
    rep.paths = n_paths;
    rep.exact_config = exact;
    for (const auto& r : per_path) {
        rep.pairs_checked += r.pairs;
        rep.monotonicity_violations += r.monotone;
        rep.indicator_disagreements += r.agree_fail;
        rep.band_disagreements += r.band;
        rep.worst_inverse_error = std::max(rep.worst_inverse_error, r.worst);
    }
    return rep;
}

struct ConvergenceReport {
    std::vector<std::size_t> steps;
    std::vector<double> worst_errors;
    /// Least-squares slope of ln(error) against ln(dt).
    double fitted_order = 0.0;
};

/// Least-squares slope of ln(err) against ln(dt).
inline double fitted_order(std::span<const double> dts, std::span<const double> errs) {
    const std::size_t n = dts.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(dts[i]) / n;
        my += std::log(errs[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(dts[i]) - mx;
        sxy += dx * (std::log(errs[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

/// Worst trajectory-inverse error at several step counts on the same
/// Brownian paths (generated at the finest level and coarsened).
inline ConvergenceReport flow_inverse_convergence(std::span<const double> x_grid,
                                                  const VolModel& vol, const DriftSpec& drift,
                                                  const LevyMeasure& m, double horizon,
                                                  std::vector<std::size_t> steps,
                                                  std::uint64_t seed, std::size_t n_paths,
                                                  Scheme scheme, unsigned workers = 1) {
    std::sort(steps.begin(), steps.end());
    const std::size_t finest = steps.back();
    for (std::size_t s : steps) {
        if (finest % s != 0) throw Error(errc::invalid_config, "step counts must divide the finest");
    }
    const JumpTerms jt = jump_terms(m);
    const TimeGrid fine(horizon, finest);
    const auto per_path = parallel_map(n_paths, workers, [&](std::size_t p) {
        const NoiseBundle b = generate_noise(fine, m, seed, p);
        std::vector<double> worst;
        for (std::size_t s : steps) {
            const NoiseBundle c = coarsen_noise(b, finest / s);
            worst.push_back(
                detail::inverse_on_path(x_grid, {}, vol, drift, jt, c, scheme, false).worst);
        }
        return worst;
    });
    ConvergenceReport rep;
    rep.steps = steps;
    rep.worst_errors.assign(steps.size(), 0.0);
    for (const auto& w : per_path) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            rep.worst_errors[i] = std::max(rep.worst_errors[i], w[i]);
        }
    }
    std::vector<double> dts;
    for (std::size_t s : steps) dts.push_back(horizon / static_cast<double>(s));
    rep.fitted_order = fitted_order(dts, rep.worst_errors);
    return rep;
}

}  // namespace flowdual
