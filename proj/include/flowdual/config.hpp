#pragma once

// Flat sectioned key = value configuration:
//
//   [market]     r, delta, T, x, y, z
//   [vol]        form = constant|tanh|time_scaled, params = [...],
//                time_coeffs = [...], cos = [...], sin = [...]
//   [levy]       intensity, law = none|atomic|kou|tnormal, params = [...]
//   [two_asset]  sigma1, sigma2, delta1, delta2, x1, x2, correlation = constant|state,
//                rho, rho1, intensity1, law1, params1, intensity2, law2, params2,
//                common_intensity, common_atoms = [l1, l2, w, ...], nodes
//   [mc]         paths, steps, seed, workers, scheme = euler|milstein,
//                monitoring = bridge|discrete
//   [pide]       J, I, width, y_min, y_max
//   [experiment] name, k
//
// '#' and ';' start comments. Unknown sections and keys are rejected.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flowdual/error.hpp"
#include "flowdual/levy.hpp"
#include "flowdual/pide.hpp"
#include "flowdual/pricing.hpp"
#include "flowdual/two_asset.hpp"
#include "flowdual/volmodel.hpp"

namespace flowdual {

struct Config {
    MarketParams market{0.05, 0.02, 1.0, 1.0, 1.0, 0.0};
    VolModel vol = VolModel::constant(0.3);
    LevyMeasure levy = LevyMeasure::zero();
    TwoAssetParams two_asset = default_two_asset();
    std::size_t two_asset_nodes = 128;
    SimConfig mc{100000, 64, 1, 1, Scheme::log_euler};
    Monitoring monitoring = Monitoring::bridge;
    std::size_t pide_J = 400;
    std::size_t pide_I = 200;
    double pide_width = 7.0;
    double pide_y_min = 0.0;  // 0 selects bounds from pide_width
    double pide_y_max = 0.0;
    std::string experiment = "put_call_duality";
    double k = 4.0;

    static TwoAssetParams default_two_asset() {
        TwoAssetParams p;
        p.vol1 = VolModel::constant(0.3);
        p.vol2 = VolModel::constant(0.2);
        p.delta1 = 0.0;
        p.delta2 = 0.0;
        p.jumps = {LevyMeasure::zero(), LevyMeasure::zero(), 0.0, {}};
        return p;
    }

    /// Reference volatility for grid sizing: sigma at (0, x).
    double sigma_ref() const { return vol.sigma(0.0, market.x); }

    PideGrid pide_grid() const {
        PideGrid g = PideGrid::around(market.x, std::max(sigma_ref(), 0.05), market.T, pide_J,
                                      pide_I, pide_width);
        if (pide_y_min > 0.0) g.y_min = pide_y_min;
        if (pide_y_max > 0.0) g.y_max = pide_y_max;
        return g;
    }
};

namespace detail {

inline std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

struct RawValue {
    std::string text;
    std::size_t line = 0;
};

using RawConfig = std::map<std::string, std::map<std::string, RawValue>>;

inline Error config_error(std::size_t line, const std::string& what) {
    return Error(errc::invalid_config, (line > 0 ? "line " + std::to_string(line) + ": " : "") + what);
}

inline double parse_number(const RawValue& v, const std::string& key) {
    const std::string s = trim(v.text);
    double out = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw config_error(v.line, "'" + key + "' expects a number, got '" + s + "'");
    }
    return out;
}

inline std::vector<double> parse_list(const RawValue& v, const std::string& key) {
    std::string s = trim(v.text);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
        throw config_error(v.line, "'" + key + "' expects a list like [a, b]");
    }
    s = s.substr(1, s.size() - 2);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_number({item, v.line}, key));
    }
    return out;
}

inline std::size_t parse_count(const RawValue& v, const std::string& key) {
    const double d = parse_number(v, key);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e15) {
        throw config_error(v.line, "'" + key + "' expects a non-negative integer");
    }
    return static_cast<std::size_t>(d);
}

inline LevyMeasure build_measure(double intensity, const std::string& law,
                                 const std::vector<double>& params, std::size_t line) {
    if (law == "none" || intensity == 0.0) return LevyMeasure::zero();
    if (!(intensity > 0.0)) throw config_error(line, "jump intensity must be >= 0");
    if (law == "atomic") {
        if (params.empty() || params.size() % 2 != 0) {
            throw config_error(line, "atomic params are location, weight pairs");
        }
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < params.size(); i += 2) atoms.push_back({params[i], params[i + 1]});
        return LevyMeasure::atomic(intensity, atoms);
    }
    if (law == "kou") {
        if (params.size() != 3) throw config_error(line, "kou params are [p, rate_up, rate_down]");
        return LevyMeasure::double_exponential(intensity, params[0], params[1], params[2]);
    }
    if (law == "tnormal") {
        if (params.size() != 4) throw config_error(line, "tnormal params are [mean, stdev, lower, upper]");
        return LevyMeasure::truncated_normal(intensity, params[0], params[1], params[2], params[3]);
    }
    throw config_error(line, "unknown jump law '" + law + "'");
}

inline VolModel build_vol(const std::string& form, const std::vector<double>& p,
                          const std::vector<double>& time_coeffs, const std::vector<double>& cos_c,
                          const std::vector<double>& sin_c, std::size_t line) {
    if (form == "constant") {
        if (p.size() != 1) throw config_error(line, "constant vol params are [sigma]");
        return VolModel::constant(p[0]);
    }
    if (form == "tanh") {
        if (p.size() != 5) throw config_error(line, "tanh vol params are [a, b, c, d, x0]");
        return VolModel::tanh_smile(p[0], p[1], p[2], p[3], p[4]);
    }
    if (form == "time_scaled") {
        if (p.size() != 2) throw config_error(line, "time_scaled vol params are [base, frequency]");
        TimeScaledVol v;
        v.base = p[0];
        v.frequency = p[1];
        if (!time_coeffs.empty()) v.time_coeffs = time_coeffs;
        v.cos_coeffs = cos_c;
        v.sin_coeffs = sin_c;
        return VolModel::time_scaled(v);
    }
    throw config_error(line, "unknown vol form '" + form + "'");
}

inline const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s{
        {"market", {"r", "delta", "T", "x", "y", "z"}},
        {"vol", {"form", "params", "time_coeffs", "cos", "sin"}},
        {"levy", {"intensity", "law", "params"}},
        {"two_asset",
         {"sigma1", "sigma2", "delta1", "delta2", "x1", "x2", "correlation", "rho", "rho1",
          "intensity1", "law1", "params1", "intensity2", "law2", "params2", "common_intensity",
          "common_atoms", "nodes"}},
        {"mc", {"paths", "steps", "seed", "workers", "scheme", "monitoring"}},
        {"pide", {"J", "I", "width", "y_min", "y_max"}},
        {"experiment", {"name", "k"}},
    };
    return s;
}

inline void check_key(const std::string& section, const std::string& key, std::size_t line) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw config_error(line, "unknown section [" + section + "]");
    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw config_error(line, "unknown key '" + key + "' in [" + section + "]");
    }
}

inline RawConfig parse_raw(std::istream& is) {
    RawConfig raw;
    std::string line, section;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error(n, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section)) throw config_error(n, "unknown section [" + section + "]");
            raw[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error(n, "expected key = value");
        if (section.empty()) throw config_error(n, "key outside of a section");
        const std::string key = trim(line.substr(0, eq));
        check_key(section, key, n);
        if (raw[section].count(key)) throw config_error(n, "duplicate key '" + key + "'");
        raw[section][key] = {trim(line.substr(eq + 1)), n};
    }
    return raw;
}

/// Interprets a raw config on top of `cfg`, then validates it.
inline void apply_raw(const RawConfig& raw, Config& cfg) {
    auto get = [&](const std::string& s, const std::string& k) -> const RawValue* {
        const auto sit = raw.find(s);
        if (sit == raw.end()) return nullptr;
        const auto kit = sit->second.find(k);
        return kit == sit->second.end() ? nullptr : &kit->second;
    };
    auto num = [&](const std::string& s, const std::string& k, double& dst) {
        if (const RawValue* v = get(s, k)) dst = parse_number(*v, k);
    };
    auto count = [&](const std::string& s, const std::string& k, std::size_t& dst) {
        if (const RawValue* v = get(s, k)) dst = parse_count(*v, k);
    };
    auto text = [&](const std::string& s, const std::string& k, std::string& dst) {
        if (const RawValue* v = get(s, k)) dst = trim(v->text);
    };
    auto list = [&](const std::string& s, const std::string& k) {
        const RawValue* v = get(s, k);
        return v ? parse_list(*v, k) : std::vector<double>{};
    };
    auto line_of = [&](const std::string& s, const std::string& k) {
        const RawValue* v = get(s, k);
        return v ? v->line : std::size_t{0};
    };

    MarketParams& mk = cfg.market;
    num("market", "r", mk.r);
    num("market", "delta", mk.delta);
    num("market", "T", mk.T);
    num("market", "x", mk.x);
    num("market", "y", mk.y);
    num("market", "z", mk.z);
    try {
        mk.validate();
    } catch (const Error& e) {
        throw config_error(line_of("market", "T"), e.what());
    }

    if (raw.count("vol")) {
        std::string form = "constant";
        text("vol", "form", form);
        cfg.vol = build_vol(form, list("vol", "params"), list("vol", "time_coeffs"),
                            list("vol", "cos"), list("vol", "sin"), line_of("vol", "form"));
    }
    if (raw.count("levy")) {
        double intensity = 0.0;
        std::string law = "none";
        num("levy", "intensity", intensity);
        text("levy", "law", law);
        cfg.levy = build_measure(intensity, law, list("levy", "params"), line_of("levy", "law"));
    }
    if (raw.count("two_asset")) {
        TwoAssetParams& p = cfg.two_asset;
        double s1 = 0.3, s2 = 0.2, rho = 0.0, rho1 = 0.0, i1 = 0.0, i2 = 0.0;
        std::string corr = "constant", law1 = "none", law2 = "none";
        num("two_asset", "sigma1", s1);
        num("two_asset", "sigma2", s2);
        num("two_asset", "delta1", p.delta1);
        num("two_asset", "delta2", p.delta2);
        num("two_asset", "x1", p.x1);
        num("two_asset", "x2", p.x2);
        num("two_asset", "rho", rho);
        num("two_asset", "rho1", rho1);
        text("two_asset", "correlation", corr);
        num("two_asset", "intensity1", i1);
        num("two_asset", "intensity2", i2);
        text("two_asset", "law1", law1);
        text("two_asset", "law2", law2);
        num("two_asset", "common_intensity", p.jumps.common_intensity);
        count("two_asset", "nodes", cfg.two_asset_nodes);
        p.vol1 = VolModel::constant(s1);
        p.vol2 = VolModel::constant(s2);
        if (corr == "constant") {
            p.corr = Correlation::constant(rho);
        } else if (corr == "state") {
            p.corr = Correlation::state(rho, rho1);
        } else {
            throw config_error(line_of("two_asset", "correlation"), "correlation is constant or state");
        }
        p.jumps.first = build_measure(i1, law1, list("two_asset", "params1"), line_of("two_asset", "law1"));
        p.jumps.second = build_measure(i2, law2, list("two_asset", "params2"), line_of("two_asset", "law2"));
        const auto atoms = list("two_asset", "common_atoms");
        if (atoms.size() % 3 != 0) {
            throw config_error(line_of("two_asset", "common_atoms"), "common_atoms are l1, l2, weight triples");
        }
        p.jumps.common_atoms.clear();
        for (std::size_t i = 0; i < atoms.size(); i += 3) {
            p.jumps.common_atoms.push_back({atoms[i], atoms[i + 1], atoms[i + 2]});
        }
        try {
            p.validate();
        } catch (const Error& e) {
            throw config_error(line_of("two_asset", "rho"), e.what());
        }
    }

    count("mc", "paths", cfg.mc.paths);
    count("mc", "steps", cfg.mc.steps);
    if (const RawValue* v = get("mc", "seed")) cfg.mc.seed = parse_count(*v, "seed");
    if (const RawValue* v = get("mc", "workers")) cfg.mc.workers = static_cast<unsigned>(parse_count(*v, "workers"));
    std::string scheme, monitoring;
    text("mc", "scheme", scheme);
    text("mc", "monitoring", monitoring);
    if (scheme == "euler") cfg.mc.scheme = Scheme::log_euler;
    else if (scheme == "milstein") cfg.mc.scheme = Scheme::log_milstein;
    else if (!scheme.empty()) throw config_error(line_of("mc", "scheme"), "scheme is euler or milstein");
    if (monitoring == "bridge") cfg.monitoring = Monitoring::bridge;
    else if (monitoring == "discrete") cfg.monitoring = Monitoring::discrete;
    else if (!monitoring.empty()) throw config_error(line_of("mc", "monitoring"), "monitoring is bridge or discrete");
    try {
        cfg.mc.validate();
    } catch (const Error& e) {
        throw config_error(line_of("mc", "paths"), e.what());
    }

    count("pide", "J", cfg.pide_J);
    count("pide", "I", cfg.pide_I);
    num("pide", "width", cfg.pide_width);
    num("pide", "y_min", cfg.pide_y_min);
    num("pide", "y_max", cfg.pide_y_max);
    if (cfg.pide_J < 4 || cfg.pide_I < 1 || !(cfg.pide_width > 0.0)) {
        throw config_error(line_of("pide", "J"), "pide needs J >= 4, I >= 1, width > 0");
    }

    text("experiment", "name", cfg.experiment);
    num("experiment", "k", cfg.k);
    if (!(cfg.k > 0.0)) throw config_error(line_of("experiment", "k"), "k must be > 0");
}

}  // namespace detail

/// Parses config text; `overrides` are "section.key=value" strings applied on top.
inline Config parse_config(std::istream& is, const std::vector<std::string>& overrides = {}) {
    detail::RawConfig raw = detail::parse_raw(is);
    for (const std::string& o : overrides) {
        const auto eq = o.find('='), dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw Error(errc::invalid_config, "override '" + o + "' is not section.key=value");
        }
        const std::string section = detail::trim(o.substr(0, dot));
        const std::string key = detail::trim(o.substr(dot + 1, eq - dot - 1));
        detail::check_key(section, key, 0);
        raw[section][key] = {detail::trim(o.substr(eq + 1)), 0};
    }
    Config cfg;
    detail::apply_raw(raw, cfg);
    return cfg;
}

inline Config parse_config_string(const std::string& text, const std::vector<std::string>& overrides = {}) {
    std::istringstream is(text);
    return parse_config(is, overrides);
}

/// Relative paths are looked up in $FLOWDUAL_CONFIG_DIR when not found as given.
inline std::string resolve_config_path(const std::string& path) {
    std::ifstream probe(path);
    if (probe) return path;
    if (const char* dir = std::getenv("FLOWDUAL_CONFIG_DIR"); dir != nullptr && !path.empty() && path.front() != '/') {
        const std::string alt = std::string(dir) + "/" + path;
        std::ifstream p2(alt);
        if (p2) return alt;
    }
    throw Error(errc::io, "config file not found: " + path);
}

inline Config load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    const std::string resolved = resolve_config_path(path);
    std::ifstream is(resolved);
    if (!is) throw Error(errc::io, "cannot open " + resolved);
    return parse_config(is, overrides);
}

}  // namespace flowdual
