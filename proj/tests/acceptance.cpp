// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Set FLOWDUAL_ACCEPTANCE_VERBOSE=1 to print every verdict row.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "flowdual/flowdual.hpp"

using namespace flowdual;

namespace {

using Rows = std::vector<VerdictReport>;

const char* kAtomicJumps = "[levy]\nintensity = 1\nlaw = atomic\nparams = [-0.1, 1]\n";

const std::vector<std::pair<std::string, std::string>>& vol_forms() {
    static const std::vector<std::pair<std::string, std::string>> v{
        {"constant", "[vol]\nform = constant\nparams = [0.3]\n"},
        {"tanh", "[vol]\nform = tanh\nparams = [0.25, 0.1, -0.5, 0.0, 1.0]\n"},
        {"time_scaled",
         "[vol]\nform = time_scaled\nparams = [0.25, 2.0]\ntime_coeffs = [1.0, 0.5]\ncos = [0.03]\nsin = [0.02]\n"},
    };
    return v;
}

Config make(const std::string& text, std::vector<std::string> overrides = {}) {
    return parse_config_string(text, overrides);
}

/// 3 vol forms x {m = 0, atomic} x {y = 0.9, 1.1} at 2e5 paths.
std::vector<Config> sweep() {
    std::vector<Config> out;
    for (const auto& [name, vol] : vol_forms()) {
        for (bool jumps : {false, true}) {
            for (const char* y : {"0.9", "1.1"}) {
                out.push_back(make(vol + (jumps ? kAtomicJumps : ""),
                                   {"market.y=" + std::string(y), "mc.paths=200000"}));
            }
        }
    }
    return out;
}

void append(Rows& all, const Rows& more, const std::string& tag) {
    for (VerdictReport r : more) {
        r.experiment = tag + ":" + r.experiment;
        all.push_back(r);
    }
}

struct Criterion {
    std::string id;
    std::string title;
    std::function<Rows()> run;
};

VerdictReport runtime_row(const std::string& id, double seconds, double budget) {
    return verdict::at_most(id + ".runtime_s", seconds, budget);
}

Rows flow_exact() {
    detail::Stopwatch sw;
    Rows rows;
    append(rows,
           verify_flow_inverse(make(std::string(kAtomicJumps),
                                    {"market.r=0.05", "market.delta=0.02", "mc.paths=1000", "mc.steps=128"})),
           "constant_atomic");
    rows.push_back(runtime_row("flow_exact", sw.seconds(), 5.0));
    return rows;
}

Rows flow_convergence() {
    detail::Stopwatch sw;
    Rows rows;
    append(rows, verify_flow_inverse(make(vol_forms()[1].second, {"mc.paths=1000", "mc.steps=64"})), "tanh");
    rows.push_back(runtime_row("flow_convergence", sw.seconds(), 30.0));
    return rows;
}

std::string tag(const Config& c) {
    return detail::describe_vol(c.vol) + "|" + detail::describe_levy(c.levy) + "|y=" + std::to_string(c.market.y);
}

Rows put_call() {
    detail::Stopwatch sw;
    Rows rows;
    for (const Config& c : sweep()) append(rows, verify_put_call_duality(c), tag(c));
    rows.push_back(runtime_row("put_call_sweep", sw.seconds(), 180.0));
    return rows;
}

Rows delta() {
    Rows rows;
    for (const Config& c : sweep()) append(rows, verify_delta_duality(c), tag(c));
    return rows;
}

Rows measure_change() {
    Rows rows;
    for (const auto& [name, vol] : {vol_forms()[0], vol_forms()[1]}) {
        const Config c = make(vol + "[levy]\nintensity = 1\nlaw = atomic\nparams = [-0.15, 0.6, 0.1, 0.4]\n",
                              {"mc.paths=200000"});
        append(rows, verify_measure_change(c), name);
    }
    return rows;
}

Rows martingale() {
    Rows rows;
    for (const Config& c : sweep()) append(rows, verify_martingale(c), tag(c));
    return rows;
}

Rows pide() {
    Rows rows;
    detail::Stopwatch sw;
    append(rows, verify_pide_accuracy(make("")), "constant");
    // two fine and two coarse solves
    rows.push_back(runtime_row("pide_accuracy_per_solve", sw.seconds() / 2.0, 20.0));
    append(rows, verify_pide_vs_mc(make(kAtomicJumps, {"mc.paths=100000"})), "constant_atomic");
    return rows;
}

Rows binary() {
    Rows rows;
    for (const auto& [name, vol] : {vol_forms()[0], vol_forms()[1]}) {
        append(rows, verify_binary_duality(make(vol, {"mc.paths=200000"})), name);
        append(rows, verify_binary_duality(make(vol + kAtomicJumps, {"mc.paths=200000"})), name + "_atomic");
    }
    return rows;
}

Rows local_vol() {
    Rows rows;
    append(rows, verify_local_vol(make(vol_forms()[0].second)), "constant");
    append(rows, verify_local_vol(make(vol_forms()[1].second)), "tanh");
    return rows;
}

Rows two_asset() {
    detail::Stopwatch sw;
    Rows rows;
    for (const char* rho : {"0", "0.5"}) {
        for (bool common : {false, true}) {
            std::string text = "[market]\ny = 1.6\n[two_asset]\nsigma1 = 0.3\nsigma2 = 0.2\ndelta1 = 0.01\n"
                               "delta2 = 0.03\nrho = " + std::string(rho) + "\n";
            if (common) text += "common_intensity = 1\ncommon_atoms = [-0.1, -0.05, 0.5, 0.05, 0.1, 0.5]\n";
            append(rows, verify_two_asset(make(text, {"mc.paths=100000", "mc.steps=32"})),
                   std::string("rho=") + rho + (common ? "|common_jumps" : "|no_jumps"));
        }
    }
    rows.push_back(runtime_row("two_asset", sw.seconds(), 300.0));
    return rows;
}

Rows barrier() {
    const Config c = make("[market]\nr = 0.05\ndelta = 0.05\nx = 1.2\ny = 1.05\nz = 0.9\n",
                          {"mc.paths=200000", "mc.steps=512"});
    Rows rows;
    append(rows, verify_barrier(c), "m=0");
    return rows;
}

Rows levy() {
    Rows rows;
    append(rows, verify_levy(make("[levy]\nintensity = 1\nlaw = kou\nparams = [0.4, 10, 5]\n", {"mc.paths=200000"})),
           "kou");
    append(rows, verify_levy(make("[levy]\nintensity = 2\nlaw = tnormal\nparams = [-0.05, 0.1, -0.5, 0.5]\n",
                                  {"mc.paths=200000"})),
           "tnormal");
    return rows;
}

}  // namespace

int main() {
    const bool verbose = std::getenv("FLOWDUAL_ACCEPTANCE_VERBOSE") != nullptr;
    const std::vector<Criterion> criteria{
        {"1", "flow inverse exact for constant sigma", flow_exact},
        {"2", "flow inverse convergence, tanh smile", flow_convergence},
        {"3", "put-call duality sweep", put_call},
        {"4", "delta duality sweep", delta},
        {"5", "measure change with atomic jumps", measure_change},
        {"6", "martingale identities sweep", martingale},
        {"7", "PIDE accuracy and Monte Carlo agreement", pide},
        {"8", "binary duality chain", binary},
        {"9", "local volatility round trip", local_vol},
        {"10", "two-asset basket and best-of", two_asset},
        {"11", "barrier duality", barrier},
        {"12", "Levy exponent and characteristic function", levy},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        detail::Stopwatch sw;
        Rows rows;
        std::string error;
        try {
            rows = c.run();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const bool pass = error.empty() && !rows.empty() && all_pass(rows);
        std::size_t ok = 0;
        for (const auto& r : rows) ok += r.pass ? 1 : 0;
        std::printf("%s criterion %2s  %-44s %zu/%zu rows  %.1f s\n", pass ? "PASS" : "FAIL", c.id.c_str(),
                    c.title.c_str(), ok, rows.size(), sw.seconds());
        if (!error.empty()) std::printf("    error: %s\n", error.c_str());
        for (const auto& r : rows) {
            if (r.pass && !verbose) continue;
            std::printf("    %s %s lhs=%.8g (se %.2g) rhs=%.8g (se %.2g) tol=%.3g %s\n", r.pass ? "ok  " : "FAIL",
                        r.experiment.c_str(), r.lhs, r.lhs_se, r.rhs, r.rhs_se, r.tolerance, r.note.c_str());
        }
        std::fflush(stdout);
        failed += pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
