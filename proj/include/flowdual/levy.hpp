#pragma once

// Finite-activity (compound Poisson) Levy jump measures: characteristic
// exponent, compensator functionals, reflection / exponential tilt and jump
// sampling.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "flowdual/error.hpp"

namespace flowdual {

struct Atom {
    double location = 0.0;
    double weight = 1.0;
};

struct AtomicLaw {
    std::vector<Atom> atoms;
};

/// Kou law: with probability p an Exp(rate_up) up-jump, else minus an Exp(rate_down).
struct DoubleExponentialLaw {
    double p = 0.5;
    double rate_up = 2.0;
    double rate_down = 2.0;
};

struct TruncatedNormalLaw {
    double mean = 0.0;
    double stdev = 0.1;
    double lower = -1.0;
    double upper = 1.0;
};

using JumpLaw = std::variant<AtomicLaw, DoubleExponentialLaw, TruncatedNormalLaw>;

enum class LevyFunctional { k1, k2, k3, tilted_mass };
enum class LevyTransform { reflect, tilt };
enum class Direction { forward, reversed };

inline Direction flipped(Direction d) {
    return d == Direction::forward ? Direction::reversed : Direction::forward;
}

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
    constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

/// True when the law integrates e^{theta l}.
inline bool has_moment(const JumpLaw& law, double theta) {
    if (const auto* kou = std::get_if<DoubleExponentialLaw>(&law)) {
        return theta < kou->rate_up && theta > -kou->rate_down;
    }
    return true;
}

/// Integral of f against the law's probability density, split at the kinks
/// -1, 0, 1 of the compensator integrands.
template <class F>
double density_expectation(const JumpLaw& law, F&& f) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr double tol = 1e-14;
    constexpr unsigned depth = 12;
    double total = 0.0;
    auto piece = [&](auto&& g, double a, double b) {
        if (!(b > a)) return;
        double err = 0.0;
        const double v = gauss_kronrod<double, 61>::integrate(g, a, b, depth, tol, &err);
        if (!std::isfinite(v) || !std::isfinite(err)) {
            throw Error(errc::moment_divergence, "non-finite jump-law integral");
        }
        total += v;
    };
    if (const auto* kou = std::get_if<DoubleExponentialLaw>(&law)) {
        const double p = kou->p, up = kou->rate_up, dn = kou->rate_down;
        auto pos = [&](double l) {
            const double w = p * up * std::exp(-up * l);
            return w == 0.0 ? 0.0 : f(l) * w;
        };
        auto neg = [&](double l) {
            const double w = (1.0 - p) * dn * std::exp(dn * l);
            return w == 0.0 ? 0.0 : f(l) * w;
        };
        const double inf = std::numeric_limits<double>::infinity();
        piece(neg, -inf, -1.0);
        piece(neg, -1.0, 0.0);
        piece(pos, 0.0, 1.0);
        piece(pos, 1.0, inf);
    } else if (const auto* tn = std::get_if<TruncatedNormalLaw>(&law)) {
        const double mass = normal_cdf((tn->upper - tn->mean) / tn->stdev) -
                            normal_cdf((tn->lower - tn->mean) / tn->stdev);
        auto dens = [&](double l) {
            return f(l) * normal_pdf((l - tn->mean) / tn->stdev) / (tn->stdev * mass);
        };
        std::array<double, 5> cuts{tn->lower, -1.0, 0.0, 1.0, tn->upper};
        std::sort(cuts.begin() + 1, cuts.end() - 1);
        double a = tn->lower;
        for (std::size_t i = 1; i < cuts.size(); ++i) {
            const double b = std::clamp(cuts[i], tn->lower, tn->upper);
            piece(dens, a, b);
            a = std::max(a, b);
        }
    }
    return total;
}

/// Expectation of f(l) under the jump-size law (atomic: exact sum).
template <class F>
double law_expectation(const JumpLaw& law, F&& f) {
    if (const auto* atomic = std::get_if<AtomicLaw>(&law)) {
        double s = 0.0;
        for (const Atom& a : atomic->atoms) s += a.weight * f(a.location);
        return s;
    }
    return density_expectation(law, f);
}

inline double functional_integrand(LevyFunctional kind, double l) {
    const double small = std::abs(l) <= 1.0 ? 1.0 : 0.0;
    switch (kind) {
        case LevyFunctional::k1: return std::expm1(l);
        case LevyFunctional::k2: return std::expm1(l) - l * small;
        case LevyFunctional::k3: return std::expm1(l) - l * std::exp(l) * small;
        case LevyFunctional::tilted_mass: return std::exp(l);
    }
    return 0.0;
}

}  // namespace detail

/// Finite-activity Levy measure m(dl) = intensity * law(dl). Immutable.
///
/// Measures built through the public factories carry an exponential moment
/// (int e^l m(dl) < inf); the compensator functionals are computed once at
/// construction. A tilted double-exponential law may lose that moment, in
/// which case the functionals throw "measure-moment-divergence".
class LevyMeasure {
public:
    LevyMeasure() { cache_.fill(0.0); }

    static LevyMeasure zero() { return LevyMeasure(); }

    static LevyMeasure atomic(double intensity, std::vector<Atom> atoms) {
        return LevyMeasure(intensity, AtomicLaw{std::move(atoms)}, true);
    }

    static LevyMeasure single_atom(double intensity, double location) {
        return atomic(intensity, {Atom{location, 1.0}});
    }

    static LevyMeasure double_exponential(double intensity, double p, double rate_up,
                                          double rate_down) {
        return LevyMeasure(intensity, DoubleExponentialLaw{p, rate_up, rate_down}, true);
    }

    static LevyMeasure truncated_normal(double intensity, double mean, double stdev, double lower,
                                        double upper) {
        return LevyMeasure(intensity, TruncatedNormalLaw{mean, stdev, lower, upper}, true);
    }

    double intensity() const { return intensity_; }
    const JumpLaw& law() const { return law_; }
    bool is_zero() const { return intensity_ == 0.0; }
    bool has_exponential_moment() const { return moment_; }

    double functional(LevyFunctional kind) const {
        if (!moment_) {
            throw Error(errc::moment_divergence, "jump law has no exponential moment");
        }
        return cache_[static_cast<std::size_t>(kind)];
    }

    /// int (e^l - 1) m(dl): the compensator of the exponential jump term.
    double k1() const { return functional(LevyFunctional::k1); }
    double tilted_mass() const { return functional(LevyFunctional::tilted_mass); }

    friend LevyMeasure levy_transform(const LevyMeasure& m, LevyTransform kind);

private:
    LevyMeasure(double intensity, JumpLaw law, bool require_moment)
        : intensity_(intensity), law_(std::move(law)) {
        if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
            throw Error(errc::invalid_config, "Levy intensity must be finite and >= 0");
        }
        validate(require_moment);
        moment_ = detail::has_moment(law_, 1.0);
        cache_.fill(0.0);
        if (moment_ && intensity_ > 0.0) {
            for (auto kind : {LevyFunctional::k1, LevyFunctional::k2, LevyFunctional::k3,
                              LevyFunctional::tilted_mass}) {
                cache_[static_cast<std::size_t>(kind)] =
                    intensity_ * detail::law_expectation(law_, [kind](double l) {
                        return detail::functional_integrand(kind, l);
                    });
            }
        }
    }

    void validate(bool require_moment) {
        if (auto* atomic = std::get_if<AtomicLaw>(&law_)) {
            if (atomic->atoms.empty()) {
                if (intensity_ > 0.0) throw Error(errc::invalid_config, "atomic law without atoms");
                return;
            }
            double total = 0.0;
            for (const Atom& a : atomic->atoms) {
                if (!(a.weight > 0.0) || !std::isfinite(a.location)) {
                    throw Error(errc::invalid_config, "atom weights must be > 0");
                }
                total += a.weight;
            }
            if (std::abs(total - 1.0) > 1e-9) {
                throw Error(errc::invalid_config, "atom weights must sum to 1");
            }
            for (Atom& a : atomic->atoms) a.weight /= total;
        } else if (const auto* kou = std::get_if<DoubleExponentialLaw>(&law_)) {
            if (!(kou->p >= 0.0 && kou->p <= 1.0) || !(kou->rate_up > 0.0) ||
                !(kou->rate_down > 0.0)) {
                throw Error(errc::invalid_config, "double-exponential needs p in [0,1], rates > 0");
            }
            if (require_moment && !(kou->rate_up > 1.0)) {
                throw Error(errc::moment_divergence, "double-exponential needs rate_up > 1");
            }
        } else if (const auto* tn = std::get_if<TruncatedNormalLaw>(&law_)) {
            if (!(tn->stdev > 0.0) || !(tn->lower < tn->upper) || !std::isfinite(tn->lower) ||
                !std::isfinite(tn->upper)) {
                throw Error(errc::invalid_config, "truncated normal needs stdev > 0, lower < upper");
            }
        }
    }

    double intensity_ = 0.0;
    JumpLaw law_ = AtomicLaw{};
    std::array<double, 4> cache_{};
    bool moment_ = true;
};

inline double levy_functional(const LevyMeasure& m, LevyFunctional kind) {
    return m.functional(kind);
}

/// Levy-Khintchine exponent psi(u) = int (e^{iul} - 1 - iu(e^l - 1)) m(dl),
/// so that E[e^{iuL_t}] = e^{t psi(u)} for the compensated process L.
inline std::complex<double> levy_psi(const LevyMeasure& m, std::complex<double> u) {
    using cd = std::complex<double>;
    if (m.is_zero() || u == cd(0.0, 0.0)) return {0.0, 0.0};
    const cd iu = cd(0.0, 1.0) * u;
    auto integrand = [iu](double l) { return std::exp(iu * l) - 1.0 - iu * std::expm1(l); };
    if (!detail::has_moment(m.law(), 1.0) || !detail::has_moment(m.law(), -u.imag())) {
        throw Error(errc::moment_divergence, "psi(u) outside the exponential-moment strip");
    }
    const double re = detail::law_expectation(m.law(), [&](double l) { return integrand(l).real(); });
    const double im = detail::law_expectation(m.law(), [&](double l) { return integrand(l).imag(); });
    return m.intensity() * cd(re, im);
}

/// reflect: image of m under l -> -l. tilt: e^l m(dl).
inline LevyMeasure levy_transform(const LevyMeasure& m, LevyTransform kind) {
    if (m.is_zero()) return m;
    if (kind == LevyTransform::reflect) {
        JumpLaw law = std::visit(
            [](const auto& l) -> JumpLaw {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, AtomicLaw>) {
                    AtomicLaw r = l;
                    for (Atom& a : r.atoms) a.location = -a.location;
                    return r;
                } else if constexpr (std::is_same_v<L, DoubleExponentialLaw>) {
                    return DoubleExponentialLaw{1.0 - l.p, l.rate_down, l.rate_up};
                } else {
                    return TruncatedNormalLaw{-l.mean, l.stdev, -l.upper, -l.lower};
                }
            },
            m.law());
        return LevyMeasure(m.intensity(), std::move(law), false);
    }

    if (!detail::has_moment(m.law(), 1.0)) {
        throw Error(errc::moment_divergence, "cannot tilt a law without exponential moment");
    }
    const double mass = m.tilted_mass();
    JumpLaw law = std::visit(
        [](const auto& l) -> JumpLaw {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, AtomicLaw>) {
                AtomicLaw r = l;
                double total = 0.0;
                for (Atom& a : r.atoms) total += (a.weight *= std::exp(a.location));
                for (Atom& a : r.atoms) a.weight /= total;
                return r;
            } else if constexpr (std::is_same_v<L, DoubleExponentialLaw>) {
                const double up = l.p * l.rate_up / (l.rate_up - 1.0);
                const double dn = (1.0 - l.p) * l.rate_down / (l.rate_down + 1.0);
                return DoubleExponentialLaw{up / (up + dn), l.rate_up - 1.0, l.rate_down + 1.0};
            } else {
                return TruncatedNormalLaw{l.mean + l.stdev * l.stdev, l.stdev, l.lower, l.upper};
            }
        },
        m.law());
    return LevyMeasure(mass, std::move(law), false);
}

inline LevyMeasure reflect(const LevyMeasure& m) { return levy_transform(m, LevyTransform::reflect); }
inline LevyMeasure tilt(const LevyMeasure& m) { return levy_transform(m, LevyTransform::tilt); }

/// Forward process L driven by m, or its time reversal L-hat driven by the
/// reflected measure.
struct LevyProcessSpec {
    LevyMeasure measure;
    Direction direction = Direction::forward;
};

/// Two-dimensional finite-activity measure m(dl1, dl2): independent
/// marginal jumps (l1, 0) and (0, l2) plus an optional common component whose
/// atoms move both coordinates at once.
struct JointAtom {
    double first = 0.0;
    double second = 0.0;
    double weight = 1.0;
};

struct JointLevyMeasure {
    LevyMeasure first;
    LevyMeasure second;
    double common_intensity = 0.0;
    std::vector<JointAtom> common_atoms;

    void validate() const {
        if (!(common_intensity >= 0.0) || !std::isfinite(common_intensity)) {
            throw Error(errc::invalid_config, "common jump intensity must be finite and >= 0");
        }
        if (common_intensity > 0.0) {
            if (common_atoms.empty()) throw Error(errc::invalid_config, "common jumps without atoms");
            double total = 0.0;
            for (const JointAtom& a : common_atoms) {
                if (!(a.weight > 0.0)) throw Error(errc::invalid_config, "joint atom weight <= 0");
                total += a.weight;
            }
            if (std::abs(total - 1.0) > 1e-9) {
                throw Error(errc::invalid_config, "joint atom weights must sum to 1");
            }
        }
    }

    /// Marginal compensator int (e^{l_i} - 1) m(dl1, dl2) of coordinate i (0 or 1).
    double k1(int coordinate) const {
        double k = coordinate == 0 ? first.k1() : second.k1();
        for (const JointAtom& a : common_atoms) {
            k += common_intensity * a.weight * std::expm1(coordinate == 0 ? a.first : a.second);
        }
        return k;
    }
};

struct JumpSample {
    double time = 0.0;
    double size = 0.0;
};

/// One draw from the jump-size law.
template <class Engine>
double sample_jump_size(const JumpLaw& law, Engine& eng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (const auto* atomic = std::get_if<AtomicLaw>(&law)) {
        double u = unif(eng);
        for (const Atom& a : atomic->atoms) {
            if (u < a.weight) return a.location;
            u -= a.weight;
        }
        return atomic->atoms.back().location;
    }
    if (const auto* kou = std::get_if<DoubleExponentialLaw>(&law)) {
        const bool up = unif(eng) < kou->p;
        const double e = -std::log1p(-unif(eng));
        return up ? e / kou->rate_up : -e / kou->rate_down;
    }
    const auto& tn = std::get<TruncatedNormalLaw>(law);
    const double lo = detail::normal_cdf((tn.lower - tn.mean) / tn.stdev);
    const double hi = detail::normal_cdf((tn.upper - tn.mean) / tn.stdev);
    double p = lo + (hi - lo) * unif(eng);
    p = std::clamp(p, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), p);
    return std::clamp(tn.mean + tn.stdev * z, tn.lower, tn.upper);
}

/// Jump events of the Poisson random measure on (0, T], sorted by time.
template <class Engine>
std::vector<JumpSample> sample_jumps(const LevyMeasure& m, double horizon, Engine& eng) {
    std::vector<JumpSample> out;
    if (m.is_zero()) return out;
    std::poisson_distribution<long> count(m.intensity() * horizon);
    const long n = count(eng);
    out.reserve(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (long i = 0; i < n; ++i) {
        // 1 - u lies in (0, 1], so times live in (0, T].
        const double t = horizon * (1.0 - unif(eng));
        out.push_back({t, sample_jump_size(m.law(), eng)});
    }
    std::sort(out.begin(), out.end(),
              [](const JumpSample& a, const JumpSample& b) { return a.time < b.time; });
    return out;
}

}  // namespace flowdual
