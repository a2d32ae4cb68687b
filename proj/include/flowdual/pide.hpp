#pragma once

// Finite differences for the forward (maturity, strike) equations of the
// Call and binary Call prices, in the log-strike variable xi = ln y.
//
// Call:   dC/dT = 1/2 s^2 C'' + (-1/2 s^2 + delta - r + k1) C' - (delta + lt) C
//                 + sum_i lambda w_i e^{l_i} C(xi - l_i)
// Binary: dc/dT = 1/2 (s^2 c')' + (1/2 s^2 + delta - r + k1) c' - (r + lambda) c
//                 + sum_i lambda w_i c(xi - l_i)
// with s = sigma(T, e^xi), k1 = int (e^l - 1) m(dl), lt = int e^l m(dl) and
// primes in xi. The local operator is Crank-Nicolson; the shift term is
// explicit inside a predictor-corrector step.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "flowdual/error.hpp"
#include "flowdual/levy.hpp"
#include "flowdual/pricing.hpp"
#include "flowdual/volmodel.hpp"

namespace flowdual {

struct PideGrid {
    double y_min = 0.2;
    double y_max = 5.0;
    std::size_t J = 400;  // strike intervals
    std::size_t I = 200;  // maturity steps
    double T = 1.0;

    void validate() const {
        if (!(y_min > 0.0) || !(y_max > y_min)) {
            throw Error(errc::invalid_config, "pide grid needs 0 < y_min < y_max");
        }
        if (J < 4 || I < 1) throw Error(errc::invalid_config, "pide grid needs J >= 4, I >= 1");
        if (!(T > 0.0)) throw Error(errc::invalid_config, "pide horizon must be > 0");
    }

    double h() const { return (std::log(y_max) - std::log(y_min)) / static_cast<double>(J); }
    double dT() const { return T / static_cast<double>(I); }
    double xi(std::size_t j) const {
        return j == J ? std::log(y_max) : std::log(y_min) + h() * static_cast<double>(j);
    }
    double strike(std::size_t j) const {
        if (j == 0) return y_min;
        if (j == J) return y_max;
        return std::exp(xi(j));
    }
    double maturity(std::size_t i) const {
        return i == I ? T : T * static_cast<double>(i) / static_cast<double>(I);
    }

    /// Bounds x e^{-+ width sigma sqrt(T)}, shifted so that ln x is a node.
    static PideGrid around(double x, double sigma_ref, double T, std::size_t J, std::size_t I,
                           double width = 6.0) {
        const double half = width * sigma_ref * std::sqrt(T);
        PideGrid g;
        g.J = J + (J % 2);
        g.I = I;
        g.T = T;
        g.y_min = x * std::exp(-half);
        g.y_max = x * std::exp(half);
        return g;
    }
};

enum class SurfaceKind { call, binary };

struct PideSurface {
    SurfaceKind kind = SurfaceKind::call;
    PideGrid grid;
    double x = 1.0;
    /// Row-major (I + 1) x (J + 1): values[i * (J + 1) + j] at (T_i, y_j).
    std::vector<double> values;
    std::string solver;

    double at(std::size_t i, std::size_t j) const { return values[i * (grid.J + 1) + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * (grid.J + 1) + j]; }

    std::vector<double> row(std::size_t i) const {
        const auto b = values.begin() + static_cast<std::ptrdiff_t>(i * (grid.J + 1));
        return {b, b + static_cast<std::ptrdiff_t>(grid.J + 1)};
    }

    /// Monotone cubic interpolation in ln y along maturity row i.
    double value_at(std::size_t i, double y) const {
        if (!(y >= grid.y_min && y <= grid.y_max)) throw Error(errc::domain, "strike outside grid");
        std::vector<double> xs(grid.J + 1), ys = row(i);
        for (std::size_t j = 0; j <= grid.J; ++j) xs[j] = grid.xi(j);
        boost::math::interpolators::pchip<std::vector<double>> f(std::move(xs), std::move(ys));
        return f(std::clamp(std::log(y), grid.xi(0), grid.xi(grid.J)));
    }
};

struct PideOptions {
    /// Implicit Euler half-step pairs replacing the first Crank-Nicolson steps.
    std::size_t rannacher_steps = 0;
    /// Atoms used to represent a density jump law in the shift term.
    std::size_t law_atoms = 256;
    /// Largest admitted jump-mass times maturity step.
    double max_jump_step = 0.5;
};

namespace detail {

/// Equal-mass quantile atoms of a density law; atomic laws pass through.
inline std::vector<Atom> law_atoms(const LevyMeasure& m, std::size_t count) {
    if (m.is_zero()) return {};
    if (const auto* a = std::get_if<AtomicLaw>(&m.law())) return a->atoms;
    std::vector<Atom> out;
    const double w = 1.0 / static_cast<double>(count);
    boost::math::normal_distribution<double> stdn;
    for (std::size_t k = 0; k < count; ++k) {
        const double u = (static_cast<double>(k) + 0.5) * w;
        double l = 0.0;
        if (const auto* kou = std::get_if<DoubleExponentialLaw>(&m.law())) {
            const double q = 1.0 - kou->p;  // mass of the negative side
            l = u < q ? std::log(u / q) / kou->rate_down
                      : -std::log((1.0 - u) / kou->p) / kou->rate_up;
        } else {
            const auto& tn = std::get<TruncatedNormalLaw>(m.law());
            const double lo = boost::math::cdf(stdn, (tn.lower - tn.mean) / tn.stdev);
            const double hi = boost::math::cdf(stdn, (tn.upper - tn.mean) / tn.stdev);
            l = tn.mean + tn.stdev * boost::math::quantile(stdn, lo + (hi - lo) * u);
        }
        out.push_back({l, w});
    }
    return out;
}

struct Tridiag {
    std::vector<double> lower, diag, upper;
};

/// Solves a tridiagonal system in place (Thomas algorithm).
inline void solve_tridiagonal(Tridiag m, std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (m.diag[i - 1] == 0.0) throw Error(errc::singular_system, "zero pivot");
        const double f = m.lower[i] / m.diag[i - 1];
        m.diag[i] -= f * m.upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    if (m.diag[n - 1] == 0.0 || !std::isfinite(m.diag[n - 1])) {
        throw Error(errc::singular_system, "zero pivot");
    }
    rhs[n - 1] /= m.diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - m.upper[i] * rhs[i + 1]) / m.diag[i];
}

class PideSolver {
public:
    PideSolver(SurfaceKind kind, const VolModel& vol, const LevyMeasure& m, const MarketParams& mk,
               const PideGrid& grid, const PideOptions& opt)
        : kind_(kind), vol_(vol), mk_(mk), g_(grid), opt_(opt) {
        g_.validate();
        mk_.validate();
        h_ = g_.h();
        xi_.resize(g_.J + 1);
        for (std::size_t j = 0; j <= g_.J; ++j) xi_[j] = g_.xi(j);
        atoms_ = law_atoms(m, opt.law_atoms);
        lambda_ = m.intensity();
        k1_ = m.is_zero() ? 0.0 : m.k1();
        tilted_ = m.is_zero() ? 0.0 : m.tilted_mass();
        const double jump_mass = kind == SurfaceKind::call ? tilted_ : lambda_;
        if (jump_mass * g_.dT() > opt.max_jump_step) {
            throw Error(errc::invalid_config, "explicit jump term needs more maturity steps");
        }
        for (std::size_t i = 0; i <= g_.I; i += std::max<std::size_t>(1, g_.I / 8)) {
            for (std::size_t j = 0; j <= g_.J; ++j) {
                if (!(vol_.sigma(g_.maturity(i), g_.strike(j)) > 0.0)) {
                    throw Error(errc::domain, "local volatility vanishes on the pide grid");
                }
            }
        }
    }

    PideSurface solve() {
        PideSurface s;
        s.kind = kind_;
        s.grid = g_;
        s.x = mk_.x;
        s.solver = kind_ == SurfaceKind::call ? "dupire-cn-pc" : "binary-cn-pc";
        s.values.assign((g_.I + 1) * (g_.J + 1), 0.0);
        std::vector<double> u(g_.J + 1);
        for (std::size_t j = 0; j <= g_.J; ++j) u[j] = initial(j);
        std::copy(u.begin(), u.end(), s.values.begin());
        const double dT = g_.dT();
        for (std::size_t i = 0; i < g_.I; ++i) {
            const double t0 = g_.maturity(i), t1 = g_.maturity(i + 1);
            if (i < opt_.rannacher_steps) {
                const double tm = 0.5 * (t0 + t1);
                implicit_step(u, t0, tm, 0.5 * dT);
                implicit_step(u, tm, t1, 0.5 * dT);
            } else {
                cn_step(u, t0, t1, dT);
            }
            std::copy(u.begin(), u.end(),
                      s.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * (g_.J + 1)));
        }
        return s;
    }

private:
    double initial(std::size_t j) const {
        const double y = g_.strike(j);
        if (kind_ == SurfaceKind::call) return std::max(mk_.x - y, 0.0);
        const double d = std::log(mk_.x) - xi_[j];
        if (std::abs(d) < 1e-9 * h_) return 0.5;
        return d > 0.0 ? 1.0 : 0.0;
    }

    double lower_boundary(double t) const {
        if (kind_ == SurfaceKind::call) {
            return mk_.x * std::exp(-mk_.delta * t) - g_.y_min * std::exp(-mk_.r * t);
        }
        return std::exp(-mk_.r * t);
    }

    /// Value outside the grid: the asymptotes of the boundary conditions.
    double outside(double xi, double t) const {
        if (xi > xi_.back()) return 0.0;
        if (kind_ == SurfaceKind::call) {
            return mk_.x * std::exp(-mk_.delta * t) - std::exp(xi) * std::exp(-mk_.r * t);
        }
        return std::exp(-mk_.r * t);
    }

    /// Local operator rows (interior nodes 1..J-1) at maturity t.
    void local_operator(double t, std::vector<double>& lo, std::vector<double>& di,
                        std::vector<double>& up) const {
        const std::size_t J = g_.J;
        lo.assign(J + 1, 0.0);
        di.assign(J + 1, 0.0);
        up.assign(J + 1, 0.0);
        const double h2 = h_ * h_;
        for (std::size_t j = 1; j < J; ++j) {
            const double s = vol_.sigma(t, g_.strike(j));
            const double s2 = s * s;
            double a_lo = 0.0, a_up = 0.0, b = 0.0, q = 0.0;
            if (kind_ == SurfaceKind::call) {
                a_lo = a_up = 0.5 * s2 / h2;
                b = -0.5 * s2 + mk_.delta - mk_.r + k1_;
                q = mk_.delta + tilted_;
            } else {
                const double sm = vol_.sigma(t, std::exp(xi_[j] - 0.5 * h_));
                const double sp = vol_.sigma(t, std::exp(xi_[j] + 0.5 * h_));
                a_lo = 0.5 * sm * sm / h2;
                a_up = 0.5 * sp * sp / h2;
                b = 0.5 * s2 + mk_.delta - mk_.r + k1_;
                q = mk_.r + lambda_;
            }
            lo[j] = a_lo - b / (2.0 * h_);
            up[j] = a_up + b / (2.0 * h_);
            di[j] = -a_lo - a_up - q;
        }
    }

    /// sum_i lambda w_i e^{l_i} u(xi - l_i) for the call, without e^{l_i} for the binary.
    std::vector<double> shift_term(const std::vector<double>& u, double t) const {
        std::vector<double> out(g_.J + 1, 0.0);
        if (atoms_.empty()) return out;
        std::vector<double> xs = xi_, ys = u;
        boost::math::interpolators::pchip<std::vector<double>> f(std::move(xs), std::move(ys));
        for (const Atom& a : atoms_) {
            const double c = lambda_ * a.weight * (kind_ == SurfaceKind::call ? std::exp(a.location) : 1.0);
            for (std::size_t j = 1; j < g_.J; ++j) {
                const double p = xi_[j] - a.location;
                const double v = (p < xi_.front() || p > xi_.back()) ? outside(p, t) : f(p);
                out[j] += c * v;
            }
        }
        return out;
    }

    void apply(const std::vector<double>& lo, const std::vector<double>& di,
               const std::vector<double>& up, const std::vector<double>& u, double scale,
               std::vector<double>& out) const {
        for (std::size_t j = 1; j < g_.J; ++j) {
            out[j] += scale * (lo[j] * u[j - 1] + di[j] * u[j] + up[j] * u[j + 1]);
        }
    }

    /// Solves (I - theta dt A(t1)) v = rhs on interior nodes with Dirichlet ends.
    std::vector<double> implicit_solve(double theta_dt, double t1, std::vector<double> rhs) const {
        std::vector<double> lo, di, up;
        local_operator(t1, lo, di, up);
        const std::size_t J = g_.J, n = J - 1;
        const double left = lower_boundary(t1), right = 0.0;
        Tridiag m{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
        std::vector<double> b(n);
        for (std::size_t j = 1; j < J; ++j) {
            const std::size_t k = j - 1;
            m.lower[k] = -theta_dt * lo[j];
            m.diag[k] = 1.0 - theta_dt * di[j];
            m.upper[k] = -theta_dt * up[j];
            b[k] = rhs[j];
        }
        b.front() -= m.lower.front() * left;
        b.back() -= m.upper.back() * right;
        solve_tridiagonal(std::move(m), b);
        std::vector<double> v(J + 1);
        v.front() = left;
        v.back() = right;
        std::copy(b.begin(), b.end(), v.begin() + 1);
        return v;
    }

    void cn_step(std::vector<double>& u, double t0, double t1, double dT) const {
        std::vector<double> lo, di, up;
        local_operator(t0, lo, di, up);
        std::vector<double> base = u;
        apply(lo, di, up, u, 0.5 * dT, base);
        const std::vector<double> j0 = shift_term(u, t0);
        if (atoms_.empty()) {
            u = implicit_solve(0.5 * dT, t1, base);
            return;
        }
        std::vector<double> rhs = base;
        for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] += dT * j0[j];
        const std::vector<double> pred = implicit_solve(0.5 * dT, t1, rhs);
        const std::vector<double> j1 = shift_term(pred, t1);
        for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = base[j] + 0.5 * dT * (j0[j] + j1[j]);
        u = implicit_solve(0.5 * dT, t1, rhs);
    }

    void implicit_step(std::vector<double>& u, double t0, double t1, double dt) const {
        std::vector<double> rhs = u;
        const std::vector<double> j0 = shift_term(u, t0);
        for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] += dt * j0[j];
        u = implicit_solve(dt, t1, rhs);
    }

    SurfaceKind kind_;
    const VolModel& vol_;
    MarketParams mk_;
    PideGrid g_;
    PideOptions opt_;
    double h_ = 0.0;
    std::vector<double> xi_;
    std::vector<Atom> atoms_;
    double lambda_ = 0.0, k1_ = 0.0, tilted_ = 0.0;
};

}  // namespace detail

/// Call surface C(T, x, y) for fixed spot mk.x.
inline PideSurface solve_dupire_surface(const VolModel& vol, const LevyMeasure& levy,
                                        const MarketParams& mk, const PideGrid& grid,
                                        PideOptions opt = {}) {
    return detail::PideSolver(SurfaceKind::call, vol, levy, mk, grid, opt).solve();
}

/// Binary Call surface c(T, x, z); the first step is smoothed by implicit Euler half-steps.
inline PideSurface solve_binary_surface(const VolModel& vol, const LevyMeasure& levy,
                                        const MarketParams& mk, const PideGrid& grid,
                                        PideOptions opt = {.rannacher_steps = 2}) {
    return detail::PideSolver(SurfaceKind::binary, vol, levy, mk, grid, opt).solve();
}

/// C(T, y_j) = int_{y_j}^{y_max} c(T, z) dz by the trapezoid rule in xi
/// (integrand c e^xi); the tail beyond y_max is taken as zero.
inline PideSurface binary_to_call(const PideSurface& c) {
    if (c.kind != SurfaceKind::binary) throw Error(errc::invalid_config, "expected a binary surface");
    const PideGrid& g = c.grid;
    PideSurface out = c;
    out.kind = SurfaceKind::call;
    out.solver = c.solver + "+integrated";
    const double h = g.h();
    for (std::size_t i = 0; i <= g.I; ++i) {
        double acc = 0.0;
        out.at(i, g.J) = 0.0;
        for (std::size_t j = g.J; j-- > 0;) {
            acc += 0.5 * h * (c.at(i, j) * g.strike(j) + c.at(i, j + 1) * g.strike(j + 1));
            out.at(i, j) = acc;
        }
    }
    return out;
}

/// Relative size of the binary surface at y_max; large values mean the tail is not negligible.
inline double binary_tail_level(const PideSurface& c) {
    double worst = 0.0;
    for (std::size_t i = 0; i <= c.grid.I; ++i) worst = std::max(worst, std::abs(c.at(i, c.grid.J - 1)));
    return worst;
}

struct LocalVolGrid {
    PideGrid grid;
    /// Row-major like PideSurface; NaN where invalid.
    std::vector<double> sigma;
    std::vector<bool> valid;

    double at(std::size_t i, std::size_t j) const { return sigma[i * (grid.J + 1) + j]; }
    bool is_valid(std::size_t i, std::size_t j) const { return valid[i * (grid.J + 1) + j]; }
};

/// sigma^2 = 2 [dC/dT - (delta - r) y dC/dy + delta C] / (y^2 d2C/dy2) by central
/// differences in (T, xi); nodes with d2C/dy2 <= eps are invalid. The first
/// and last maturity rows use one-sided second-order differences in T.
inline LocalVolGrid extract_local_vol(const PideSurface& c, const MarketParams& mk,
                                      double eps = 1e-6) {
    if (c.kind != SurfaceKind::call) throw Error(errc::invalid_config, "expected a call surface");
    const PideGrid& g = c.grid;
    if (g.I < 2) throw Error(errc::invalid_config, "need at least 3 maturity rows");
    LocalVolGrid out;
    out.grid = g;
    const std::size_t w = g.J + 1;
    out.sigma.assign((g.I + 1) * w, std::numeric_limits<double>::quiet_NaN());
    out.valid.assign((g.I + 1) * w, false);
    const double h = g.h(), dT = g.dT();
    for (std::size_t i = 1; i <= g.I; ++i) {
        bool any = false;
        for (std::size_t j = 1; j < g.J; ++j) {
            double ct = 0.0;
            if (i == g.I) {
                ct = (3.0 * c.at(i, j) - 4.0 * c.at(i - 1, j) + c.at(i - 2, j)) / (2.0 * dT);
            } else {
                ct = (c.at(i + 1, j) - c.at(i - 1, j)) / (2.0 * dT);
            }
            const double cx = (c.at(i, j + 1) - c.at(i, j - 1)) / (2.0 * h);
            const double cxx = (c.at(i, j + 1) - 2.0 * c.at(i, j) + c.at(i, j - 1)) / (h * h);
            const double y = g.strike(j);
            const double cyy = (cxx - cx) / (y * y);
            if (!(cyy > eps)) continue;
            const double s2 = 2.0 * (ct - (mk.delta - mk.r) * cx + mk.delta * c.at(i, j)) / (cxx - cx);
            if (!(s2 > 0.0)) continue;
            out.sigma[i * w + j] = std::sqrt(s2);
            out.valid[i * w + j] = true;
            any = true;
        }
        if (!any) throw Error(errc::surface_not_convex, "no convex node on maturity row");
    }
    return out;
}

/// CSV with header T,strike,value, row-major by maturity, 17 significant digits.
inline void write_surface_csv(const PideSurface& s, std::ostream& os) {
    os << "T,strike,value\n";
    char buf[96];
    for (std::size_t i = 0; i <= s.grid.I; ++i) {
        for (std::size_t j = 0; j <= s.grid.J; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.grid.maturity(i),
                          s.grid.strike(j), s.at(i, j));
            os << buf;
        }
    }
}

inline void write_surface_csv(const PideSurface& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error(errc::io, "cannot open " + path);
    write_surface_csv(s, os);
    if (!os) throw Error(errc::io, "write failed for " + path);
}

/// Reads a surface written by write_surface_csv; the grid is recovered from the
/// distinct maturities and strikes.
inline PideSurface read_surface_csv(std::istream& is, SurfaceKind kind = SurfaceKind::call,
                                    double x = 1.0) {
    std::string line;
    if (!std::getline(is, line) || line != "T,strike,value") {
        throw Error(errc::io, "missing surface header");
    }
    std::vector<double> ts, ks, vs;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        double t = 0, k = 0, v = 0;
        char* end = nullptr;
        const char* p = line.c_str();
        t = std::strtod(p, &end);
        if (*end != ',') throw Error(errc::io, "bad surface row " + std::to_string(line_no));
        k = std::strtod(end + 1, &end);
        if (*end != ',') throw Error(errc::io, "bad surface row " + std::to_string(line_no));
        v = std::strtod(end + 1, &end);
        if (*end != '\0') throw Error(errc::io, "bad surface row " + std::to_string(line_no));
        ts.push_back(t);
        ks.push_back(k);
        vs.push_back(v);
    }
    std::size_t w = 0;
    while (w < ts.size() && ts[w] == ts.front()) ++w;
    if (w < 5 || vs.size() % w != 0 || vs.size() / w < 2) {
        throw Error(errc::io, "surface is not a full maturity x strike grid");
    }
    PideSurface s;
    s.kind = kind;
    s.x = x;
    s.solver = "csv";
    s.grid.J = w - 1;
    s.grid.I = vs.size() / w - 1;
    s.grid.y_min = ks.front();
    s.grid.y_max = ks[w - 1];
    s.grid.T = ts.back();
    s.values = std::move(vs);
    return s;
}

}  // namespace flowdual
