#pragma once

// Monte Carlo estimators for the single-asset payoffs and their duals, the
// barrier pair, and closed-form oracles (Black-Scholes, atomic-jump series).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "flowdual/error.hpp"
#include "flowdual/flow.hpp"
#include "flowdual/levy.hpp"
#include "flowdual/noise.hpp"
#include "flowdual/parallel.hpp"
#include "flowdual/volmodel.hpp"

namespace flowdual {

struct MarketParams {
    double r = 0.0;
    double delta = 0.0;
    double T = 1.0;
    double x = 1.0;
    double y = 1.0;
    double z = 0.0;

    double gamma() const { return r - delta; }

    void validate() const {
        if (!(T > 0.0) || !std::isfinite(T)) throw Error(errc::invalid_config, "T must be > 0");
        if (!(x > 0.0) || !std::isfinite(x)) throw Error(errc::invalid_config, "spot x must be > 0");
        if (!(y >= 0.0) || !std::isfinite(y)) throw Error(errc::invalid_config, "strike y must be >= 0");
        if (!(z >= 0.0) || !std::isfinite(z)) throw Error(errc::invalid_config, "barrier z must be >= 0");
        if (!std::isfinite(r) || !std::isfinite(delta)) {
            throw Error(errc::invalid_config, "rates must be finite");
        }
    }
};

struct SimConfig {
    std::size_t paths = 100000;
    std::size_t steps = 64;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    Scheme scheme = Scheme::log_euler;

    void validate() const {
        if (paths < 2) throw Error(errc::invalid_config, "need at least two paths");
        if (steps < 1) throw Error(errc::invalid_config, "need at least one step");
    }
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
};

/// call and binary_call are forward expectations; dual_put and binary_dual
/// their dual representations. The binary strike is `y`.
enum class Payoff { call, dual_put, binary_call, binary_dual };

inline const char* payoff_name(Payoff p) {
    switch (p) {
        case Payoff::call: return "call";
        case Payoff::dual_put: return "dual_put";
        case Payoff::binary_call: return "binary_call";
        case Payoff::binary_dual: return "binary_dual";
    }
    return "?";
}

/// Mean and standard error of f(path) over sim.paths paths.
template <class F>
McEstimate mc_estimate(const SimConfig& sim, F&& per_path) {
    sim.validate();
    const std::vector<double> v = parallel_map(sim.paths, sim.workers, per_path);
    const SampleStats s = sample_stats(v);
    return {s.mean, s.std_error, sim.paths, sim.steps, sim.seed};
}

inline McEstimate mc_price(Payoff payoff, const MarketParams& mk, const VolModel& vol,
                           const LevyMeasure& levy, const SimConfig& sim) {
    mk.validate();
    const TimeGrid grid(mk.T, sim.steps);
    const double disc_r = std::exp(-mk.r * mk.T);
    const double disc_d = std::exp(-mk.delta * mk.T);
    const FlowOptions opt{sim.scheme, false, false};
    switch (payoff) {
        case Payoff::call:
        case Payoff::binary_call: {
            const DriftSpec drift = DriftSpec::rate_gap(mk.gamma());
            const JumpTerms jt = jump_terms(levy);
            const bool binary = payoff == Payoff::binary_call;
            return mc_estimate(sim, [&](std::size_t p) {
                const NoiseBundle b = generate_noise(grid, levy, sim.seed, p, family::forward);
                const double xt = simulate_forward(mk.x, vol, drift, jt, b, opt).terminal;
                if (binary) return xt >= mk.y ? disc_r : 0.0;
                return disc_r * std::max(xt - mk.y, 0.0);
            });
        }
        case Payoff::dual_put: {
            const LevyMeasure tilted = tilt(levy);
            const JumpTerms jt = tilted_jump_terms(levy);
            return mc_estimate(sim, [&](std::size_t p) {
                if (mk.y == 0.0) return disc_d * mk.x;
                const NoiseBundle b =
                    reverse_noise(generate_noise(grid, tilted, sim.seed, p, family::dual));
                const double yt = simulate_dual_Y(mk.y, vol, mk.r, mk.delta, jt, b, opt).terminal;
                return disc_d * std::max(mk.x - yt, 0.0);
            });
        }
        case Payoff::binary_dual: {
            const DriftSpec drift = DriftSpec::rate_gap(mk.gamma());
            const JumpTerms jt = jump_terms(levy);
            return mc_estimate(sim, [&](std::size_t p) {
                if (mk.y == 0.0) return disc_r;
                const NoiseBundle b =
                    reverse_noise(generate_noise(grid, levy, sim.seed, p, family::dual));
                const double zt = simulate_backward(mk.y, vol, drift, jt, b, opt).terminal;
                return mk.x >= zt ? disc_r : 0.0;
            });
        }
    }
    throw Error(errc::invalid_config, "unknown payoff");
}

enum class ClosedFormKind { call, put, binary };

/// Lognormal prices with continuous rates; the binary is cash-or-nothing e^{-rT} N(d2).
inline double bs_closed_form(double sigma, const MarketParams& mk, ClosedFormKind kind) {
    mk.validate();
    if (!(sigma >= 0.0)) throw Error(errc::invalid_config, "sigma must be >= 0");
    const double dr = std::exp(-mk.r * mk.T), dd = std::exp(-mk.delta * mk.T);
    const double fwd = mk.x * dd, pv_strike = mk.y * dr;
    const double sd = sigma * std::sqrt(mk.T);
    double n1 = 0.0, n2 = 0.0;
    if (mk.y == 0.0) {
        n1 = n2 = 1.0;
    } else if (sd == 0.0) {
        n1 = n2 = fwd >= pv_strike ? 1.0 : 0.0;
    } else {
        const double d1 = (std::log(fwd / pv_strike) + 0.5 * sd * sd) / sd;
        n1 = detail::normal_cdf(d1);
        n2 = detail::normal_cdf(d1 - sd);
    }
    switch (kind) {
        case ClosedFormKind::call: return fwd * n1 - pv_strike * n2;
        case ClosedFormKind::put: return pv_strike * (1.0 - n2) - fwd * (1.0 - n1);
        case ClosedFormKind::binary: return dr * n2;
    }
    return 0.0;
}

/// e^{-delta T} N(d1): the x-derivative of the Black-Scholes call.
inline double bs_call_delta(double sigma, const MarketParams& mk) {
    mk.validate();
    if (mk.y == 0.0) return std::exp(-mk.delta * mk.T);
    const double sd = sigma * std::sqrt(mk.T);
    const double d1 =
        (std::log(mk.x / mk.y) + (mk.r - mk.delta) * mk.T + 0.5 * sd * sd) / sd;
    return std::exp(-mk.delta * mk.T) * detail::normal_cdf(d1);
}

/// Call under constant sigma and an atomic jump measure by conditioning on
/// the independent Poisson counts of each atom.
inline double atomic_series_call(double sigma, const MarketParams& mk, const LevyMeasure& m) {
    mk.validate();
    if (m.is_zero()) return bs_closed_form(sigma, mk, ClosedFormKind::call);
    const auto* law = std::get_if<AtomicLaw>(&m.law());
    if (law == nullptr) throw Error(errc::invalid_config, "series oracle needs an atomic measure");
    const double k1 = m.k1();
    const auto& atoms = law->atoms;
    double total = 0.0;
    std::function<void(std::size_t, double, double)> rec = [&](std::size_t i, double prob,
                                                                double shift) {
        if (i == atoms.size()) {
            MarketParams shifted = mk;
            shifted.x = mk.x * std::exp(shift - k1 * mk.T);
            total += prob * bs_closed_form(sigma, shifted, ClosedFormKind::call);
            return;
        }
        const double mean = m.intensity() * atoms[i].weight * mk.T;
        const auto n_max = static_cast<std::size_t>(mean + 12.0 * std::sqrt(mean) + 25.0);
        double pn = std::exp(-mean);
        for (std::size_t n = 0; n <= n_max; ++n) {
            if (n > 0) pn *= mean / static_cast<double>(n);
            rec(i + 1, prob * pn, shift + static_cast<double>(n) * atoms[i].location);
        }
    };
    rec(0, 1.0, 0.0);
    return total;
}

enum class Monitoring { discrete, bridge };

/// Both sides of the barrier duality and of its complement
///   E[(X_T - y)^+ 1{tau <= T}] = E[(Y_T - x)^+ 1{t <= T}].
struct BarrierEstimate {
    McEstimate lhs;
    McEstimate rhs;
    McEstimate lhs_complement;
    McEstimate rhs_complement;
};

namespace detail {

/// Probability that a log-Brownian bridge starting a = ln(v_k / z) > 0 and
/// ending b = ln(v_{k+1} / z) > 0 with variance s2 dips below 0.
inline double bridge_crossing(double a, double b, double s2) {
    if (!(s2 > 0.0)) return 0.0;
    return std::exp(-2.0 * a * b / s2);
}

struct BarrierPath {
    double survive = 1.0;  // probability of no crossing given the grid values
    double terminal = 0.0;
    double stopped = 0.0;  // value at the discrete hitting time, or z under bridge monitoring
};

/// Walks a grid path with the local variance sigma(t_k, v_k)^2 dt of each step.
template <class SigmaAt>
BarrierPath monitor(const std::vector<double>& path, double z, double dt, Monitoring mon,
                    SigmaAt&& sigma_at) {
    BarrierPath out;
    out.terminal = path.back();
    if (path.front() <= z) {
        out.survive = 0.0;
        out.stopped = path.front();
        return out;
    }
    double a = std::log(path.front() / z);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        if (path[k + 1] <= z) {
            out.survive = 0.0;
            out.stopped = mon == Monitoring::discrete ? path[k + 1] : z;
            return out;
        }
        if (mon == Monitoring::bridge) {
            const double b = std::log(path[k + 1] / z);
            const double s = sigma_at(k, path[k]);
            out.survive *= 1.0 - bridge_crossing(a, b, s * s * dt);
            a = b;
        }
    }
    out.stopped = z;
    return out;
}

}  // namespace detail

/// Barrier duality E[(X_T - y)^+ 1{tau_z > T}] = E[(x - Y_{T ^ t_z})^+] for
/// m = 0 and r = delta. The left side uses the forward flow, the right side
/// the driftless dual Y with time-reversed sigma; both undiscounted.
inline BarrierEstimate mc_barrier(const MarketParams& mk, const VolModel& vol,
                                  const LevyMeasure& levy, const SimConfig& sim,
                                  Monitoring mon = Monitoring::bridge) {
    mk.validate();
    if (!levy.is_zero() || mk.r != mk.delta) {
        throw Error(errc::barrier_hypothesis, "barrier duality needs m = 0 and r = delta");
    }
    if (!(mk.z > 0.0) || mk.x < mk.z || mk.y < mk.z) {
        throw Error(errc::barrier_hypothesis, "barrier duality needs x, y >= z > 0");
    }
    const TimeGrid grid(mk.T, sim.steps);
    const double dt = grid.dt();
    const LevyMeasure none = LevyMeasure::zero();
    const FlowOptions opt{sim.scheme, true, false};
    const DriftSpec drift = DriftSpec::rate_gap(0.0);
    const std::size_t n = sim.steps;

    struct Pair {
        double main = 0.0, complement = 0.0;
    };
    auto forward = parallel_map(sim.paths, sim.workers, [&](std::size_t p) {
        const NoiseBundle b = generate_noise(grid, none, sim.seed, p, family::forward);
        const FlowResult f = simulate_forward(mk.x, vol, drift, JumpTerms{}, b, opt);
        const auto bp = detail::monitor(f.path, mk.z, dt, mon, [&](std::size_t k, double v) {
            return vol.sigma(grid.time(k), v);
        });
        const double pay = std::max(bp.terminal - mk.y, 0.0);
        return Pair{bp.survive * pay, (1.0 - bp.survive) * pay};
    });
    auto dual = parallel_map(sim.paths, sim.workers, [&](std::size_t p) {
        const NoiseBundle b =
            reverse_noise(generate_noise(grid, none, sim.seed, p, family::dual));
        const FlowResult f = simulate_dual_Y(mk.y, vol, mk.r, mk.delta, JumpTerms{}, b, opt);
        const auto bp = detail::monitor(f.path, mk.z, dt, mon, [&](std::size_t k, double v) {
            return vol.sigma(grid.time(n - k), v);
        });
        const double alive = std::max(mk.x - bp.terminal, 0.0);
        const double killed = std::max(mk.x - bp.stopped, 0.0);
        return Pair{bp.survive * alive + (1.0 - bp.survive) * killed,
                    (1.0 - bp.survive) * std::max(bp.terminal - mk.x, 0.0)};
    });
    auto collect = [&](const std::vector<Pair>& v, bool complement) {
        std::vector<double> s(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) s[i] = complement ? v[i].complement : v[i].main;
        const SampleStats st = sample_stats(s);
        return McEstimate{st.mean, st.std_error, sim.paths, sim.steps, sim.seed};
    };
    return {collect(forward, false), collect(dual, false), collect(forward, true),
            collect(dual, true)};
}

}  // namespace flowdual
