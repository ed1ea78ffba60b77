#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "diffsched/report.hpp"
#include "diffsched/studies.hpp"

using namespace diffsched;

TEST(SpecTemplate, Instantiation) {
    EXPECT_EQ(instantiate_spec_template("dpm2_a:N+dpm2:2N", 3), "dpm2_a:3+dpm2:6");
    EXPECT_EQ(instantiate_spec_template("euler:24", 5), "euler:24");
    EXPECT_EQ(instantiate_spec_template("heun: N + euler:4N", 2), "heun:2+euler:8");
    EXPECT_THROW(instantiate_spec_template("heun:xN", 2), std::invalid_argument);
}

TEST(KarrasExtension, ContinuesTheRamp) {
    const double sp = karras_extension_below_zero(4, 0.002, 80.0, 7.0);
    const double a = std::pow(80.0, 1 / 7.0), b = std::pow(0.002, 1 / 7.0);
    EXPECT_NEAR(sp, std::pow(a + 0.25 * (a - b), 7.0), 1e-12 * sp);
    EXPECT_GT(sp, 80.0);
}

TEST(Convergence, Orders) {
    ConvergenceConfig cfg;
    const auto euler = convergence_study(SamplerKind::Euler, cfg);
    EXPECT_GE(euler.order, 0.8);
    EXPECT_LE(euler.order, 1.2);
    for (SamplerKind k : {SamplerKind::Heun, SamplerKind::Dpm2, SamplerKind::DpmPP2M})
        EXPECT_GE(convergence_study(k, cfg).order, 1.7) << canonical_name(k);
    EXPECT_EQ(euler.points.size(), 6u);
    EXPECT_EQ(euler.points.back().nfe, 256);
    EXPECT_THROW(convergence_study(SamplerKind::EulerA, cfg), std::invalid_argument);
}

TEST(Sweep, DeterministicAcrossJobCounts) {
    SweepConfig cfg;
    cfg.oracle = parse_oracle_flag("gaussian:1");
    cfg.n_values = {1, 2};
    cfg.seeds = {4, 5};
    cfg.samples = 32;
    cfg.timing = false;
    for (auto& e : preset_entries("best", ScheduleOptions{})) cfg.entries.push_back(std::move(e));
    cfg.entries.push_back(spec_entry("euler_a:3N", ScheduleOptions{}));
    const auto a = records_csv(run_sweep(cfg));
    cfg.jobs = 4;
    const auto b = records_csv(run_sweep(cfg));
    EXPECT_EQ(a, b);
    const auto records = run_sweep(cfg);
    ASSERT_EQ(records.size(), 7u * 2 * 2);
    EXPECT_EQ(records[0].run_id, "dpm2a-dpm2@N1/s4");
    EXPECT_EQ(records[1].run_id, "dpm2a-dpm2@N1/s5");
    EXPECT_EQ(records[2].run_id, "dpm2a-dpm2@N2/s4");
    EXPECT_EQ(records.back().spec_text, "euler_a:6");
    EXPECT_FALSE(records[0].wall_time_ms.has_value());
    const auto series = aggregate_by_spec(records, cfg.entries);
    ASSERT_EQ(series.size(), 7u);
    EXPECT_EQ(series[0].x, (std::vector<double>{6, 12}));
}

TEST(Sweep, RejectsDimensionMismatch) {
    SweepConfig cfg;
    cfg.oracle = parse_oracle_flag("gmm:" DIFFSCHED_DATA_DIR "/two_modes.txt");
    cfg.dim = 3;
    cfg.entries = preset_entries("euler", ScheduleOptions{});
    EXPECT_THROW(run_sweep(cfg), std::invalid_argument);
}

TEST(Csv, RecordsAndQuoting) {
    RunRecord r;
    r.run_id = "a,b";
    r.spec_text = "euler:2";
    r.seed = 3;
    r.dim = 2;
    r.oracle_label = "say \"hi\"";
    r.nfe = 2;
    r.metric_name = "m";
    r.metric_value = 0.1;
    const auto csv = records_csv({r});
    EXPECT_EQ(csv, std::string(kRunRecordHeader) + "\n\"a,b\",euler:2,3,2,\"say \"\"hi\"\"\",2,m,0.1,\n");
    r.wall_time_ms = 1.5;
    EXPECT_NE(records_csv({r}).find(",0.1,1.5\n"), std::string::npos);
}

TEST(Svg, WellFormedWithOnePolylinePerSeries) {
    std::vector<ChartSeries> series{{"a<b", {6, 12, 18}, {1.0, 0.5, 0.1}}, {"c", {6, 12}, {2.0, 0.01}}};
    ChartOptions opt;
    opt.log_y = true;
    opt.title = "t & u";
    const auto svg = svg_line_chart(series, opt);
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    const std::regex poly("<polyline ");
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator()), 2);
    EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
    EXPECT_NE(svg.find("t &amp; u"), std::string::npos);
    EXPECT_EQ(svg.find("a<b"), std::string::npos);
    EXPECT_THROW(svg_line_chart({{"bad", {1, 2}, {1}}}, opt), std::invalid_argument);
}
