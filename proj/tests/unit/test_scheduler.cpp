#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>

#include "diffsched/oracle.hpp"
#include "diffsched/scheduler.hpp"
#include "diffsched/verify/numerics.hpp"

using namespace diffsched;

namespace {

DenoiserOracle counting(std::shared_ptr<std::atomic<int>> counter) {
    return DenoiserOracle(
        [counter, base = gaussian_denoiser(1.0)](const Vector& x, double s) {
            counter->fetch_add(1);
            return base(x, s);
        },
        "counting");
}

}  // namespace

TEST(SpecParse, Grammar) {
    const auto s = parse_schedule_spec("heun:10+dpmpp2m:20");
    ASSERT_EQ(s.segments.size(), 2u);
    EXPECT_EQ(s.segments[0], (Segment{SamplerKind::Heun, 10}));
    EXPECT_EQ(s.segments[1], (Segment{SamplerKind::DpmPP2M, 20}));
    EXPECT_EQ(s.total_steps(), 30);
    const auto t = parse_schedule_spec("  dpm2_a : 2 +\tdpm2:4 ");
    EXPECT_EQ(t.text(), "dpm2_a:2+dpm2:4");
    EXPECT_FALSE(t.ode_only());
    EXPECT_TRUE(s.ode_only());
}

TEST(SpecParse, ErrorsCarryOffsets) {
    auto offset_of = [](std::string_view text) -> std::size_t {
        try {
            parse_schedule_spec(text);
        } catch (const ParseError& e) {
            return e.offset();
        }
        return std::string::npos;
    };
    EXPECT_EQ(offset_of("heun:0"), 5u);
    EXPECT_EQ(offset_of(""), 0u);
    EXPECT_EQ(offset_of("euler:3+ddim:4"), 8u);
    EXPECT_EQ(offset_of("euler3"), 0u);
    EXPECT_EQ(offset_of("euler:3 euler:2"), 8u);
    EXPECT_EQ(offset_of("euler:-2"), 6u);
    EXPECT_EQ(offset_of("euler:2+"), 8u);
}

TEST(NfeTotal, Examples) {
    EXPECT_EQ(nfe_total(parse_schedule_spec("euler:24")), 24);
    EXPECT_EQ(nfe_total(parse_schedule_spec("heun:12")), 24);
    EXPECT_EQ(nfe_total(parse_schedule_spec("dpm2_a:2+dpm2:4")), 12);
    ScheduleOptions zero;
    zero.append_zero = true;
    EXPECT_EQ(nfe_total(parse_schedule_spec("heun:12", zero)), 23);
    EXPECT_EQ(nfe_total(parse_schedule_spec("heun:6+dpm2:6", zero)), 23);
}

TEST(GlobalSchedule, Conventions) {
    const auto plain = global_schedule(parse_schedule_spec("euler:4"));
    EXPECT_EQ(plain.size(), 5u);
    EXPECT_EQ(plain[0], 80.0);
    EXPECT_EQ(plain[4], 0.002);
    ScheduleOptions zero;
    zero.append_zero = true;
    const auto z = global_schedule(parse_schedule_spec("euler:4", zero));
    EXPECT_EQ(z.size(), 5u);
    EXPECT_EQ(z[3], 0.002);
    EXPECT_EQ(z[4], 0.0);
}

TEST(Presets, Examples) {
    EXPECT_EQ(preset("dpm2a-dpm2", 2).text(), "dpm2_a:2+dpm2:4");
    EXPECT_EQ(preset("heun-euler", 2).text(), "heun:2+euler:8");
    EXPECT_EQ(preset("heun", 2).text(), "heun:6");
    EXPECT_EQ(preset("euler", 1).text(), "euler:6");
    EXPECT_EQ(preset("dpmppsde-dpmpp2m-2n", 1).text(), "dpmpp_sde:2+dpmpp2m:2");
    EXPECT_THROW(preset("nope", 2), PresetNotFound);
    EXPECT_THROW(preset("euler", 0), std::invalid_argument);
}

TEST(Presets, Registry) {
    EXPECT_EQ(preset_names().size(), 79u);
    EXPECT_EQ(single_preset_names().size(), 9u);
    for (const auto& name : best_preset_names()) EXPECT_NO_THROW(preset(name, 3));
    for (const auto& name : preset_names())
        for (int n = 1; n <= 5; ++n) EXPECT_EQ(nfe_total(preset(name, n)), 6 * n) << name;
}

TEST(RunScheduler, NfeAccountingMatchesCalls) {
    auto counter = std::make_shared<std::atomic<int>>(0);
    for (const char* text : {"dpm2_a:2+dpm2:4", "heun:3+euler_a:2+dpmpp_2m_sde:4", "dpmpp_sde:5"}) {
        for (bool zero : {false, true}) {
            ScheduleOptions opt;
            opt.append_zero = zero;
            const auto spec = parse_schedule_spec(text, opt);
            counter->store(0);
            const auto traj = run_scheduler(spec, counting(counter), 1, 2);
            EXPECT_EQ(traj.nfe, nfe_total(spec)) << text;
            EXPECT_EQ(counter->load(), traj.nfe);
            EXPECT_EQ(traj.nfe_cumulative.back(), traj.nfe);
        }
    }
}

TEST(RunScheduler, ExampleRun) {
    const auto traj = run_scheduler(parse_schedule_spec("dpm2_a:2+dpm2:4"), gaussian_denoiser(1.0), 7, 2);
    EXPECT_EQ(traj.nfe, 12);
    EXPECT_EQ(traj.states.size(), 7u);
    EXPECT_EQ(traj.segment_boundaries, (std::vector<std::size_t>{2}));
    EXPECT_EQ(traj.segment_of_state, (std::vector<int>{0, 0, 0, 1, 1, 1, 1}));
    EXPECT_EQ(traj.seed, 7u);
}

TEST(RunScheduler, DeterministicAndContinuous) {
    const auto D = gmm_denoiser(verify::two_mode_gmm());
    const auto spec = parse_schedule_spec("dpmpp_sde:3+euler_a:2+dpmpp2m:5");
    const auto a = run_scheduler(spec, D, 99, 2);
    const auto b = run_scheduler(spec, D, 99, 2);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_TRUE((a.states[i].x.array() == b.states[i].x.array()).all());
    for (std::size_t i = 0; i + 1 < a.sigma_trace.size(); ++i) EXPECT_GT(a.sigma_trace[i], a.sigma_trace[i + 1]);
    EXPECT_TRUE((sample_final(spec, D, 99, 2).array() == a.final_x().array()).all());
    const auto c = run_scheduler(spec, D, 100, 2);
    EXPECT_NE(a.final_x()[0], c.final_x()[0]);
}

TEST(RunScheduler, OdeRunsIgnoreTheStepStream) {
    const auto D = gaussian_denoiser(1.0);
    const auto spec = parse_schedule_spec("heun:4+dpmpp2m:3");
    const Vector x0 = initial_draw(5, 3, 80.0);
    const auto a = run_scheduler_from(spec, D, x0, 5);
    const auto b = run_scheduler_from(spec, D, x0, 6);
    EXPECT_TRUE((a.final_x().array() == b.final_x().array()).all());
}

TEST(RunScheduler, StepNoiseIndexedByGlobalStep) {
    const auto D = constant_denoiser(Vector::Zero(1));
    ScheduleOptions opt;
    opt.mode = ScheduleMode::Slice;
    const auto whole = run_scheduler(parse_schedule_spec("euler_a:6", opt), D, 3, 1);
    const auto split = run_scheduler(parse_schedule_spec("euler:2+euler_a:4", opt), D, 3, 1);
    const auto probe = [&](const Trajectory& t, std::size_t i) {
        const double s = t.sigma_trace[i], n = t.sigma_trace[i + 1];
        return (t.states[i + 1].x[0] - (n * n) / (s * s) * t.states[i].x[0]) / ((n / s) * std::sqrt(s * s - n * n));
    };
    for (std::size_t i = 2; i < 6; ++i) EXPECT_NEAR(probe(whole, i), probe(split, i), 1e-9);
}

TEST(RunScheduler, HistoryClearedAtBoundariesUnlessCarried) {
    const auto D = gaussian_denoiser(1.0);
    const auto spec = parse_schedule_spec("dpmpp2m:3+dpmpp2m:3");
    const Vector x0 = initial_draw(1, 2, 80.0);
    const auto cleared = run_scheduler_from(spec, D, x0, 1);
    RunOptions carry;
    carry.carry_history = true;
    const auto carried = run_scheduler_from(spec, D, x0, 1, carry);
    EXPECT_NE(cleared.final_x()[0], carried.final_x()[0]);
    EXPECT_EQ(cleared.states[3].x[0], carried.states[3].x[0]);
}

TEST(RunScheduler, WarmStartCacheFeedsFirstStep) {
    const auto D = gaussian_denoiser(1.0);
    const auto spec = parse_schedule_spec("dpmpp2m:4");
    const Vector x0 = initial_draw(2, 2, 80.0);
    RunOptions warm;
    warm.initial_cache.store(Node::at(-1), CachedPrediction{Vector::Zero(2), 120.0, Provenance::History});
    const auto a = run_scheduler_from(spec, D, x0, 2);
    const auto b = run_scheduler_from(spec, D, x0, 2, warm);
    EXPECT_NE(a.states[1].x[0], b.states[1].x[0]);
}

TEST(TrajectoryCsv, Layout) {
    const auto traj = run_scheduler(parse_schedule_spec("euler:2"), gaussian_denoiser(1.0), 0, 2);
    const auto csv = trajectory_csv(traj);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,segment,sigma,nfe_cum,x_0,x_1");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_NE(csv.find("\n0,0,80,0,"), std::string::npos);
}
