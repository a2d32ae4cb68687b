#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "flowdual/config.hpp"

using namespace flowdual;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& ov = {}) {
    try {
        parse_config_string(text, ov);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), errc::invalid_config);
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, EmptyGivesDefaults) {
    const Config c = parse_config_string("");
    EXPECT_DOUBLE_EQ(c.market.r, 0.05);
    EXPECT_DOUBLE_EQ(c.market.delta, 0.02);
    EXPECT_DOUBLE_EQ(c.vol.sigma(0.0, 1.0), 0.3);
    EXPECT_TRUE(c.levy.is_zero());
    EXPECT_EQ(c.mc.paths, 100000u);
    EXPECT_EQ(c.mc.steps, 64u);
    EXPECT_EQ(c.experiment, "put_call_duality");
}

TEST(Config, FullDocument) {
    const Config c = parse_config_string(R"(
# smile with jumps
[market]
r = 0.03
delta = 0.01
T = 0.5
[vol]
form = tanh
params = [0.25, 0.1, -0.5, 0.0, 1.0]
[levy]
intensity = 1
law = kou
params = [0.4, 10, 5]   ; p, up, down
[mc]
paths = 500
scheme = milstein
monitoring = discrete
[experiment]
name = barrier
k = 3
)");
    EXPECT_DOUBLE_EQ(c.market.T, 0.5);
    EXPECT_FALSE(c.vol.is_constant());
    EXPECT_NEAR(c.levy.intensity(), 1.0, 0.0);
    EXPECT_EQ(c.mc.scheme, Scheme::log_milstein);
    EXPECT_EQ(c.monitoring, Monitoring::discrete);
    EXPECT_EQ(c.experiment, "barrier");
    EXPECT_DOUBLE_EQ(c.k, 3.0);
}

TEST(Config, NegativeMaturityRejected) {
    EXPECT_NE(error_of("[market]\nT = -1\n").find("line 2"), std::string::npos);
}

TEST(Config, UnknownKeyNamed) {
    const std::string msg = error_of("[market]\nr = 0.05\nsigmaa = 0.2\n");
    EXPECT_NE(msg.find("sigmaa"), std::string::npos);
    EXPECT_NE(msg.find("line 3"), std::string::npos);
    EXPECT_NE(error_of("[nope]\n").find("nope"), std::string::npos);
}

TEST(Config, MalformedValues) {
    EXPECT_NE(error_of("[mc]\npaths = many\n").find("paths"), std::string::npos);
    EXPECT_FALSE(error_of("[vol]\nparams = 0.3\n").empty());
    EXPECT_FALSE(error_of("[market]\nr = 1\nr = 2\n").empty());
    EXPECT_FALSE(error_of("r = 1\n").empty());
    EXPECT_FALSE(error_of("[two_asset]\ncorrelation = state\nrho = 0.7\nrho1 = 0.6\n").empty());
}

TEST(Config, OverridesApplyOnTop) {
    const Config c = parse_config_string("[market]\nr = 0.01\n", {"market.r=0.04", "mc.paths=123"});
    EXPECT_DOUBLE_EQ(c.market.r, 0.04);
    EXPECT_EQ(c.mc.paths, 123u);
    EXPECT_FALSE(error_of("", {"market.bogus=1"}).empty());
    EXPECT_FALSE(error_of("", {"no_equals"}).empty());
}

TEST(Config, SearchDirectoryAndMissingFile) {
    const auto dir = std::filesystem::temp_directory_path() / "flowdual_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "small.ini");
        f << "[mc]\npaths = 77\n";
    }
    ::setenv("FLOWDUAL_CONFIG_DIR", dir.c_str(), 1);
    EXPECT_EQ(load_config("small.ini").mc.paths, 77u);
    ::unsetenv("FLOWDUAL_CONFIG_DIR");
    try {
        load_config("definitely_missing.ini");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), errc::io);
    }
    std::filesystem::remove_all(dir);
}
