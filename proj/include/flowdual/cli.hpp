#pragma once

// Batch front end: flowdual <price|pide|flow-check|verify|suite> [options].
// Exit codes: 0 all verdicts pass, 1 tolerance failure, 2 config or usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flowdual/config.hpp"
#include "flowdual/error.hpp"
#include "flowdual/harness.hpp"
#include "flowdual/pide.hpp"
#include "flowdual/pricing.hpp"
#include "flowdual/report.hpp"

namespace flowdual {

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int failure = 1;
inline constexpr int usage = 2;
}  // namespace exit_code

struct CliOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out;
    std::string format = "csv";
    std::string experiment;
    std::vector<std::string> overrides;
    std::string payoff = "call";
    std::string surface = "call";
};

namespace detail {

inline Config cli_config(const CliOptions& o) {
    std::vector<std::string> ov = o.overrides;
    if (o.seed) ov.push_back("mc.seed=" + std::to_string(*o.seed));
    if (o.workers) ov.push_back("mc.workers=" + std::to_string(*o.workers));
    if (o.config.empty()) return parse_config_string("", ov);
    return load_config(o.config, ov);
}

inline void print_rows(const std::vector<VerdictReport>& rows, std::ostream& os) {
    for (const auto& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-44s %s  lhs=%.6g (se %.2g)  rhs=%.6g (se %.2g)", r.experiment.c_str(),
                      r.pass ? "PASS" : "FAIL", r.lhs, r.lhs_se, r.rhs, r.rhs_se);
        os << buf;
        if (!r.note.empty()) os << "  [" << r.note << "]";
        os << '\n';
    }
}

inline int emit(const std::vector<VerdictReport>& rows, const CliOptions& o, std::ostream& out) {
    print_rows(rows, out);
    if (!o.out.empty()) write_report(rows, parse_report_format(o.format), o.out);
    return all_pass(rows) ? exit_code::pass : exit_code::failure;
}

inline Payoff parse_payoff(const std::string& s) {
    for (Payoff p : {Payoff::call, Payoff::dual_put, Payoff::binary_call, Payoff::binary_dual}) {
        if (s == payoff_name(p)) return p;
    }
    throw Error(errc::invalid_config, "unknown payoff '" + s + "'");
}

}  // namespace detail

inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    CLI::App app{"Jump-diffusion local-volatility duality lab"};
    app.require_subcommand(1, 1);
    CliOptions o;
    auto common = [&o](CLI::App* s) {
        s->add_option("-c,--config", o.config, "config file (also searched in $FLOWDUAL_CONFIG_DIR)");
        s->add_option("--seed", o.seed, "master seed");
        s->add_option("--workers", o.workers, "worker threads (0 = all cores)");
        s->add_option("-o,--out", o.out, "report or surface output path");
        s->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--set", o.overrides, "override, section.key=value (repeatable)");
    };
    CLI::App* price = app.add_subcommand("price", "Monte Carlo price of one payoff");
    common(price);
    price->add_option("--payoff", o.payoff, "call|dual_put|binary_call|binary_dual");
    CLI::App* pide = app.add_subcommand("pide", "solve the call or binary surface");
    common(pide);
    pide->add_option("--surface", o.surface, "call|binary")->check(CLI::IsMember({"call", "binary"}));
    CLI::App* flow = app.add_subcommand("flow-check", "inverse-flow checks");
    common(flow);
    CLI::App* verify = app.add_subcommand("verify", "run one experiment");
    common(verify);
    verify->add_option("-e,--experiment", o.experiment, "experiment name (default: config)");
    CLI::App* suite = app.add_subcommand("suite", "run every experiment");
    common(suite);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::pass : exit_code::usage;
    }

    try {
        const Config cfg = detail::cli_config(o);
        if (price->parsed()) {
            const McEstimate e = mc_price(detail::parse_payoff(o.payoff), cfg.market, cfg.vol, cfg.levy, cfg.mc);
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s %.10g se %.3g paths %zu steps %zu seed %llu\n", o.payoff.c_str(),
                          e.value, e.std_error, e.n_paths, e.n_steps, static_cast<unsigned long long>(e.seed));
            out << buf;
            return exit_code::pass;
        }
        if (pide->parsed()) {
            const PideGrid g = cfg.pide_grid();
            const PideSurface s = o.surface == "call" ? solve_dupire_surface(cfg.vol, cfg.levy, cfg.market, g)
                                                      : solve_binary_surface(cfg.vol, cfg.levy, cfg.market, g);
            if (o.out.empty()) {
                write_surface_csv(s, out);
            } else {
                write_surface_csv(s, o.out);
                out << "wrote " << (g.I + 1) * (g.J + 1) << " nodes to " << o.out << '\n';
            }
            return exit_code::pass;
        }
        if (flow->parsed()) return detail::emit(verify_flow_inverse(cfg), o, out);
        if (verify->parsed()) {
            return detail::emit(run_experiment(o.experiment.empty() ? cfg.experiment : o.experiment, cfg), o, out);
        }
        return detail::emit(run_suite(cfg), o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    }
}

}  // namespace flowdual
