#pragma once

// Parametric local volatility functions with analytic spatial derivatives,
// plus a numerical diagnostic of the bounded x^k d^k/dx^k regularity class.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "flowdual/error.hpp"

namespace flowdual {

/// level + amplitude * tanh(slope * ln(x / anchor) + time_slope * t)
struct TanhProfile {
    double level = 0.0;
    double amplitude = 0.0;
    double slope = 0.0;
    double time_slope = 0.0;
    double anchor = 1.0;

    double argument(double t, double x) const {
        return slope * std::log(x / anchor) + time_slope * t;
    }
    double value(double t, double x) const { return level + amplitude * std::tanh(argument(t, x)); }
    double dx(double t, double x) const {
        const double s = 1.0 / std::cosh(argument(t, x));
        return amplitude * slope * s * s / x;
    }
    double dxx(double t, double x) const {
        const double u = argument(t, x);
        const double s = 1.0 / std::cosh(u);
        return -amplitude * slope * s * s * (2.0 * slope * std::tanh(u) + 1.0) / (x * x);
    }
};

struct ConstantVol {
    double sigma = 0.2;
};

/// sigma(t, x) = f(t) * g(ln x) with f a polynomial in t and g a trigonometric
/// series g(u) = base + sum_k cos_k cos(k w u) + sin_k sin(k w u).
struct TimeScaledVol {
    std::vector<double> time_coeffs{1.0};
    double base = 0.2;
    double frequency = 1.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    double f(double t) const {
        double v = 0.0;
        for (auto it = time_coeffs.rbegin(); it != time_coeffs.rend(); ++it) v = v * t + *it;
        return v;
    }
    /// g and its first two derivatives in u = ln x.
    std::array<double, 3> g(double u) const {
        std::array<double, 3> out{base, 0.0, 0.0};
        const std::size_t n = std::max(cos_coeffs.size(), sin_coeffs.size());
        for (std::size_t k = 1; k <= n; ++k) {
            const double c = k <= cos_coeffs.size() ? cos_coeffs[k - 1] : 0.0;
            const double s = k <= sin_coeffs.size() ? sin_coeffs[k - 1] : 0.0;
            const double w = static_cast<double>(k) * frequency;
            const double cw = std::cos(w * u), sw = std::sin(w * u);
            out[0] += c * cw + s * sw;
            out[1] += w * (-c * sw + s * cw);
            out[2] += -w * w * (c * cw + s * sw);
        }
        return out;
    }
};

struct VolValues {
    double sigma = 0.0;
    double dsigma = 0.0;  // d sigma / dx
    double eta = 0.0;     // x sigma
    double deta = 0.0;    // sigma + x dsigma
};

class VolModel {
public:
    using Form = std::variant<ConstantVol, TanhProfile, TimeScaledVol>;

    VolModel() : form_(ConstantVol{}) {}

    static VolModel constant(double sigma) {
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
            throw Error(errc::invalid_config, "constant volatility must be >= 0");
        }
        return VolModel(ConstantVol{sigma});
    }

    /// a + b tanh(c ln(x/x0) + d t), requires a > |b|.
    static VolModel tanh_smile(double a, double b, double c, double d, double x0) {
        if (!(a > std::abs(b)) || !(x0 > 0.0) || !std::isfinite(c) || !std::isfinite(d)) {
            throw Error(errc::invalid_config, "tanh smile needs a > |b| and x0 > 0");
        }
        return VolModel(TanhProfile{a, b, c, d, x0});
    }

    static VolModel time_scaled(TimeScaledVol form) {
        if (form.time_coeffs.empty() || !(form.frequency > 0.0)) {
            throw Error(errc::invalid_config, "time-scaled volatility needs f coefficients and w > 0");
        }
        return VolModel(std::move(form));
    }

    const Form& form() const { return form_; }

    bool is_constant() const { return std::holds_alternative<ConstantVol>(form_); }

    bool is_time_homogeneous() const {
        if (const auto* p = std::get_if<TanhProfile>(&form_)) return p->time_slope == 0.0;
        if (const auto* s = std::get_if<TimeScaledVol>(&form_)) {
            return std::all_of(s->time_coeffs.begin() + 1, s->time_coeffs.end(),
                               [](double c) { return c == 0.0; });
        }
        return true;
    }

    VolValues eval(double t, double x) const {
        if (!(x > 0.0)) throw Error(errc::domain, "local volatility needs x > 0");
        VolValues v;
        if (const auto* c = std::get_if<ConstantVol>(&form_)) {
            v.sigma = c->sigma;
        } else if (const auto* p = std::get_if<TanhProfile>(&form_)) {
            v.sigma = p->value(t, x);
            v.dsigma = p->dx(t, x);
        } else {
            const auto& s = std::get<TimeScaledVol>(form_);
            const double f = s.f(t);
            const auto g = s.g(std::log(x));
            v.sigma = f * g[0];
            v.dsigma = f * g[1] / x;
        }
        v.eta = x * v.sigma;
        v.deta = v.sigma + x * v.dsigma;
        return v;
    }

    double sigma(double t, double x) const { return eval(t, x).sigma; }

    /// Second x-derivative of sigma.
    double d2sigma(double t, double x) const {
        if (!(x > 0.0)) throw Error(errc::domain, "local volatility needs x > 0");
        if (const auto* p = std::get_if<TanhProfile>(&form_)) return p->dxx(t, x);
        if (const auto* s = std::get_if<TimeScaledVol>(&form_)) {
            const auto g = s->g(std::log(x));
            return s->f(t) * (g[2] - g[1]) / (x * x);
        }
        return 0.0;
    }

private:
    explicit VolModel(Form f) : form_(std::move(f)) {}
    Form form_;
};

inline VolValues vol_eval(const VolModel& v, double t, double x) { return v.eval(t, x); }

struct ClassBounds {
    double max_sup = 1e3;
    double refinement_tolerance = 0.10;
};

struct ClassReport {
    /// sup |x^k d^k sigma / dx^k| for k = 0..3, on the given and on the refined grid.
    std::array<double, 4> sups{};
    std::array<double, 4> refined_sups{};
    double min_sigma = 0.0;
    double max_abs_deta = 0.0;
    double eta_at_xmin = 0.0;
    bool positive = false;
    bool bounded = false;
    bool stable = false;
    bool pass = false;
};

namespace detail {

inline std::vector<double> refine(std::span<const double> g) {
    std::vector<double> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i > 0) out.push_back(0.5 * (g[i - 1] + g[i]));
        out.push_back(g[i]);
    }
    return out;
}

inline void class_sups(const VolModel& v, std::span<const double> ts, std::span<const double> xs,
                       std::array<double, 4>& sups, double& min_sigma, double& max_deta) {
    sups.fill(0.0);
    min_sigma = std::numeric_limits<double>::infinity();
    max_deta = 0.0;
    for (double t : ts) {
        for (double x : xs) {
            const VolValues e = v.eval(t, x);
            const double h = 1e-3 * x;
            const double up = v.eval(t, x + h).dsigma;
            const double dn = v.eval(t, x - h).dsigma;
            const double d2 = (up - dn) / (2.0 * h);
            const double d3 = (up - 2.0 * e.dsigma + dn) / (h * h);
            sups[0] = std::max(sups[0], std::abs(e.sigma));
            sups[1] = std::max(sups[1], std::abs(x * e.dsigma));
            sups[2] = std::max(sups[2], std::abs(x * x * d2));
            sups[3] = std::max(sups[3], std::abs(x * x * x * d3));
            min_sigma = std::min(min_sigma, e.sigma);
            max_deta = std::max(max_deta, std::abs(e.deta));
        }
    }
}

}  // namespace detail

/// Numerical membership diagnostic: positivity, finite sups of x^k d^k sigma
/// (k = 2, 3 by nested central differences of the analytic first
/// derivative) and their stability when both grids are refined.
inline ClassReport vol_class_check(const VolModel& v, std::span<const double> t_grid,
                                   std::span<const double> x_grid, ClassBounds bounds = {}) {
    if (t_grid.empty() || x_grid.empty()) throw Error(errc::invalid_config, "empty diagnostic grid");
    if (*std::min_element(x_grid.begin(), x_grid.end()) <= 0.0) {
        throw Error(errc::domain, "diagnostic grid needs x > 0");
    }
    ClassReport r;
    detail::class_sups(v, t_grid, x_grid, r.sups, r.min_sigma, r.max_abs_deta);
    double ignored_min = 0.0, ignored_deta = 0.0;
    const auto tf = detail::refine(t_grid);
    const auto xf = detail::refine(x_grid);
    detail::class_sups(v, tf, xf, r.refined_sups, ignored_min, ignored_deta);

    const double xmin = *std::min_element(x_grid.begin(), x_grid.end());
    for (double t : t_grid) r.eta_at_xmin = std::max(r.eta_at_xmin, std::abs(v.eval(t, xmin).eta));

    r.positive = r.min_sigma > 0.0;
    r.bounded = std::all_of(r.sups.begin(), r.sups.end(),
                            [&](double s) { return std::isfinite(s) && s <= bounds.max_sup; });
    r.stable = true;
    for (std::size_t k = 0; k < 4; ++k) {
        const double scale = std::max(r.sups[k], 1e-12);
        if (std::abs(r.refined_sups[k] - r.sups[k]) > bounds.refinement_tolerance * scale &&
            std::abs(r.refined_sups[k] - r.sups[k]) > 1e-9) {
            r.stable = false;
        }
    }
    r.pass = r.positive && r.bounded && r.stable;
    return r;
}

}  // namespace flowdual
