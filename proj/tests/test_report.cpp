#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "flowdual/report.hpp"

using namespace flowdual;

namespace {

std::vector<VerdictReport> sample() {
    auto a = verdict::statistical("put_call_duality", 0.1234567890123, 1e-3, 0.1231, 2e-3, 4.0, 9);
    a.runtime_s = 1.5;
    a.note = "x, \"quoted\"";
    auto b = verdict::at_least("delta_duality.fd_order", std::numeric_limits<double>::infinity(), 0.9);
    auto c = verdict::absolute("binary_duality.coupled_disagreements", 0.0, 0.0, 0.0, 3);
    return {a, b, c};
}

void expect_same(const VerdictReport& x, const VerdictReport& y) {
    auto same = [](double u, double v) { return (std::isnan(u) && std::isnan(v)) || u == v; };
    EXPECT_EQ(x.experiment, y.experiment);
    EXPECT_TRUE(same(x.lhs, y.lhs));
    EXPECT_TRUE(same(x.lhs_se, y.lhs_se));
    EXPECT_TRUE(same(x.rhs, y.rhs));
    EXPECT_TRUE(same(x.rhs_se, y.rhs_se));
    EXPECT_TRUE(same(x.discrepancy_se_units, y.discrepancy_se_units));
    EXPECT_TRUE(same(x.tolerance, y.tolerance));
    EXPECT_EQ(x.pass, y.pass);
    EXPECT_TRUE(same(x.runtime_s, y.runtime_s));
    EXPECT_EQ(x.seed, y.seed);
}

}  // namespace

TEST(Report, EmptyIsAnError) {
    std::ostringstream os;
    EXPECT_THROW(write_csv({}, os), Error);
    EXPECT_THROW(write_json({}, os), Error);
}

TEST(Report, SingleRowCsv) {
    std::ostringstream os;
    write_csv({sample().front()}, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, report_header());
    std::size_t n = 0;
    while (std::getline(is, line)) ++n;
    EXPECT_EQ(n, 1u);
}

TEST(Report, CsvRoundTrip) {
    const auto rows = sample();
    std::stringstream ss;
    write_csv(rows, ss);
    const auto back = read_csv(ss);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) expect_same(rows[i], back[i]);
}

TEST(Report, JsonRoundTripMatchesCsv) {
    const auto rows = sample();
    std::stringstream js, cs;
    write_json(rows, js);
    write_csv(rows, cs);
    const auto a = read_json(js), b = read_csv(cs);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) expect_same(a[i], b[i]);
    EXPECT_EQ(a[0].note, rows[0].note);
}

TEST(Report, RejectsMalformedInput) {
    std::istringstream bad_header("experiment,lhs\n");
    EXPECT_THROW(read_csv(bad_header), Error);
    std::istringstream short_row(std::string(report_header()) + "\na,1,2\n");
    EXPECT_THROW(read_csv(short_row), Error);
    std::istringstream bad_json("{not json");
    EXPECT_THROW(read_json(bad_json), Error);
    EXPECT_THROW(parse_report_format("xml"), Error);
}

TEST(Report, SameSeedSameBytesApartFromRuntime) {
    Config cfg = parse_config_string("", {"mc.paths=2000", "mc.steps=8"});
    auto strip = [](std::vector<VerdictReport> rows) {
        for (auto& r : rows) r.runtime_s = 0.0;
        std::ostringstream os;
        write_csv(rows, os);
        return os.str();
    };
    EXPECT_EQ(strip(verify_put_call_duality(cfg)), strip(verify_put_call_duality(cfg)));
}
