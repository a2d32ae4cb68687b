#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "flowdual/cli.hpp"

using namespace flowdual;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "flowdual");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST(Cli, VerifyPasses) {
    EXPECT_EQ(run({"verify", "-e", "put_call_duality", "--set", "mc.paths=4000", "--set", "mc.steps=16"}), 0);
}

TEST(Cli, VerifyFailureExitsOne) {
    EXPECT_EQ(run({"verify", "-e", "put_call_duality", "--set", "mc.paths=4000", "--set", "experiment.k=1e-9"}), 1);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({"verify", "--config", "missing_file.ini"}), 2);
    EXPECT_EQ(run({"verify", "--bogus"}), 2);
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"verify", "-e", "nope"}), 2);
    EXPECT_EQ(run({"price", "--payoff", "straddle"}), 2);
}

TEST(Cli, DeterministicPrice) {
    std::string text;
    ASSERT_EQ(run({"price", "--payoff", "call", "--set", "vol.params=[0]", "--set", "mc.paths=10"}, &text), 0);
    std::istringstream is(text);
    std::string name;
    double value = 0.0;
    is >> name >> value;
    EXPECT_EQ(name, "call");
    EXPECT_NEAR(value, std::exp(-0.02) - std::exp(-0.05), 1e-10);
}

TEST(Cli, WritesReports) {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string csv = (dir / "flowdual_cli.csv").string(), json = (dir / "flowdual_cli.json").string();
    ASSERT_EQ(run({"verify", "-e", "levy", "-o", csv}), 0);
    ASSERT_EQ(run({"verify", "-e", "levy", "-o", json, "--format", "json"}), 0);
    const auto a = read_report(ReportFormat::csv, csv), b = read_report(ReportFormat::json, json);
    EXPECT_EQ(a.size(), b.size());
    EXPECT_GT(a.size(), 0u);
    std::remove(csv.c_str());
    std::remove(json.c_str());
}

TEST(Cli, SurfaceToStdout) {
    std::string text;
    ASSERT_EQ(run({"pide", "--surface", "binary", "--set", "pide.J=20", "--set", "pide.I=4"}, &text), 0);
    EXPECT_EQ(text.rfind("T,strike,value\n", 0), 0u);
}
