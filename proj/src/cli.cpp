#include "diffsched/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <tuple>
#include <stdexcept>

#include "diffsched/format.hpp"
#include "diffsched/metrics.hpp"
#include "diffsched/report.hpp"
#include "diffsched/scheduler.hpp"
#include "diffsched/studies.hpp"
#include "diffsched/verify/criteria.hpp"

#ifndef DIFFSCHED_DATA_DIR
#define DIFFSCHED_DATA_DIR "data"
#endif

namespace diffsched::cli {

namespace {

/// Raised while turning flags into configuration; reported as a usage error.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::uint64_t parse_u64(std::string_view text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("bad seed '" + std::string(text) + "'");
    return v;
}

struct Globals {
    std::uint64_t seed = 0;
    int dim = 2;
    std::string oracle = "gaussian:1";
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    double rho = 7.0;
    std::string schedule_mode = "regenerate";
    bool append_zero = false;
    std::string out;
    std::string svg;
    bool carry_history = false;
    std::string dpm2a_variant = "literal";
    bool no_timing = false;
    int jobs = 1;
};

ScheduleOptions schedule_options(const Globals& g) {
    ScheduleOptions o;
    o.sigma_min = g.sigma_min;
    o.sigma_max = g.sigma_max;
    o.rho = g.rho;
    o.mode = parse_schedule_mode(g.schedule_mode);
    o.append_zero = g.append_zero;
    if (!(o.sigma_min > 0.0) || !(o.sigma_max > o.sigma_min) || !(o.rho > 0.0))
        throw std::invalid_argument("need 0 < sigma-min < sigma-max and rho > 0");
    return o;
}

RunOptions run_options(const Globals& g) {
    RunOptions r;
    r.carry_history = g.carry_history;
    r.dpm2a_variant = parse_dpm2a_variant(g.dpm2a_variant);
    return r;
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

template <class Fn>
auto configure(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const std::out_of_range& e) {
        throw UsageError(e.what());
    }
}

int cmd_run(const Globals& g, const std::string& spec_text, const std::string& preset_name, int preset_n,
            const std::string& trajectory_path, std::ostream& out) {
    auto [spec, oracle_cfg, run] = configure([&] {
        const ScheduleOptions opts = schedule_options(g);
        if (spec_text.empty() == preset_name.empty()) throw std::invalid_argument("give exactly one of --spec or --preset");
        ScheduleSpec s = spec_text.empty() ? preset(preset_name, preset_n, opts) : parse_schedule_spec(spec_text, opts);
        if (g.dim < 1) throw std::invalid_argument("--dim must be positive");
        return std::tuple{s, parse_oracle_flag(g.oracle), run_options(g)};
    });
    const DenoiserOracle denoiser = make_oracle(oracle_cfg);
    const auto started = std::chrono::steady_clock::now();
    const Trajectory traj = run_scheduler(spec, denoiser, g.seed, g.dim, run);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    auto record = [&](std::string name, double value) {
        RunRecord r;
        r.run_id = "run";
        r.spec_text = spec.text();
        r.seed = g.seed;
        r.dim = g.dim;
        r.oracle_label = oracle_cfg.label;
        r.nfe = traj.nfe;
        r.metric_name = std::move(name);
        r.metric_value = value;
        if (!g.no_timing) r.wall_time_ms = ms;
        return r;
    };
    std::vector<RunRecord> records;
    records.push_back(record("final_sigma", traj.sigma_trace.back()));
    records.push_back(record("final_norm", traj.final_x().norm()));
    if (oracle_cfg.kind == OracleConfig::Kind::Gaussian && spec.ode_only()) {
        const Vector exact = exact_gaussian_ode_endpoint(traj.states.front().x, spec.options.sigma_max,
                                                         traj.sigma_trace.back(), oracle_cfg.sigma_data);
        records.push_back(record("endpoint_error", (traj.final_x() - exact).norm()));
    }
    const std::string metrics = records_csv(records);
    const std::string dump = trajectory_csv(traj);
    write_text(g.out, metrics, out);
    if (!trajectory_path.empty()) {
        write_text(trajectory_path, dump, out);
    } else {
        if (g.out.empty() || g.out == "-") out << '\n';
        out << dump;
    }
    if (!g.svg.empty()) {
        std::vector<ChartSeries> series(static_cast<std::size_t>(g.dim));
        for (int d = 0; d < g.dim; ++d) {
            series[d].label = "x_" + std::to_string(d);
            for (const auto& s : traj.states) {
                series[d].x.push_back(static_cast<double>(s.step_index));
                series[d].y.push_back(s.x[d]);
            }
        }
        ChartOptions chart;
        chart.title = spec.text();
        chart.x_label = "step";
        chart.y_label = "coordinate";
        write_text(g.svg, svg_line_chart(series, chart), out);
    }
    return 0;
}

int cmd_sweep(const Globals& g, const std::vector<std::string>& presets, const std::vector<std::string>& specs,
              const std::vector<int>& n_values, const std::string& seeds, int samples, int projections,
              std::ostream& out) {
    SweepConfig cfg = configure([&] {
        SweepConfig c;
        const ScheduleOptions opts = schedule_options(g);
        for (const auto& p : presets)
            for (auto& e : preset_entries(p, opts)) c.entries.push_back(std::move(e));
        for (const auto& s : specs) c.entries.push_back(spec_entry(s, opts));
        if (c.entries.empty()) throw std::invalid_argument("sweep needs at least one --preset or --spec");
        c.n_values = n_values;
        for (int n : n_values)
            if (n < 1) throw std::invalid_argument("--N values must be positive");
        c.seeds = parse_seed_list(seeds);
        c.samples = samples;
        c.projections = projections;
        c.dim = g.dim;
        c.oracle = parse_oracle_flag(g.oracle);
        c.run = run_options(g);
        c.jobs = g.jobs;
        c.timing = !g.no_timing;
        if (samples < 2 || projections < 1) throw std::invalid_argument("need --samples >= 2 and --projections >= 1");
        return c;
    });
    const auto records = run_sweep(cfg);
    write_text(g.out, records_csv(records), out);
    if (!g.svg.empty()) {
        ChartOptions chart;
        chart.title = "sliced W2 vs NFE (" + cfg.oracle.label + ")";
        chart.y_label = "sliced W2";
        chart.log_y = true;
        write_text(g.svg, svg_line_chart(aggregate_by_spec(records, cfg.entries), chart), out);
    }
    return 0;
}

int cmd_convergence(const Globals& g, const std::vector<std::string>& samplers, const std::vector<int>& n_values,
                    bool cold_start, std::ostream& out, std::ostream& err) {
    auto [cfg, kinds, oracle_cfg] = configure([&] {
        const OracleConfig oc = parse_oracle_flag(g.oracle);
        if (oc.kind != OracleConfig::Kind::Gaussian)
            throw std::invalid_argument("convergence needs a gaussian:<sigma_data> oracle");
        ConvergenceConfig c;
        c.sigma_data = oc.sigma_data;
        c.schedule = schedule_options(g);
        c.step_counts = n_values;
        c.dim = g.dim;
        c.seed = g.seed;
        c.warm_start = !cold_start;
        std::vector<SamplerKind> ks;
        for (const auto& name : samplers) {
            const auto k = parse_sampler_name(name);
            if (!k) throw std::invalid_argument("unknown sampler '" + name + "'");
            if (sampler_class(*k) != SamplerClass::Ode)
                throw std::invalid_argument("'" + name + "' is stochastic; convergence needs an ODE sampler");
            ks.push_back(*k);
        }
        if (n_values.size() < 3) throw std::invalid_argument("--N needs at least three values");
        return std::tuple{c, ks, oc};
    });
    std::vector<RunRecord> records;
    std::vector<ChartSeries> series;
    for (SamplerKind kind : kinds) {
        const auto started = std::chrono::steady_clock::now();
        const ConvergenceResult res = convergence_study(kind, cfg);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        ChartSeries s;
        s.label = std::string(canonical_name(kind));
        for (const auto& p : res.points) {
            RunRecord r;
            r.run_id = s.label + "@N" + std::to_string(p.steps);
            r.spec_text = s.label + ":" + std::to_string(p.steps);
            r.seed = g.seed;
            r.dim = g.dim;
            r.oracle_label = oracle_cfg.label;
            r.nfe = p.nfe;
            r.metric_name = "relative_error";
            r.metric_value = p.error;
            if (!g.no_timing) r.wall_time_ms = ms / static_cast<double>(res.points.size());
            records.push_back(std::move(r));
            s.x.push_back(p.nfe);
            s.y.push_back(p.error);
        }
        err << s.label << " order " << format_double(res.order) << '\n';
        series.push_back(std::move(s));
    }
    write_text(g.out, records_csv(records), out);
    if (!g.svg.empty()) {
        ChartOptions chart;
        chart.title = "endpoint error vs NFE";
        chart.y_label = "relative error";
        chart.log_y = true;
        write_text(g.svg, svg_line_chart(series, chart), out);
    }
    return 0;
}

int cmd_selfcheck(const Globals& g, bool full, const std::string& gmm, std::ostream& out) {
    verify::SuiteOptions opts;
    opts.include_trend = full;
    opts.trend.gmm_path = gmm.empty() ? std::string(DIFFSCHED_DATA_DIR) + "/two_modes.txt" : gmm;
    opts.trend.jobs = g.jobs;
    bool ok = true;
    opts.on_result = [&](const verify::CheckResult& r) {
        out << verify::format_result(r) << '\n' << std::flush;
        ok = ok && r.passed;
    };
    verify::run_suite(opts);
    return ok ? 0 : 1;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> out;
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const std::uint64_t lo = parse_u64(text.substr(0, dots));
        const std::uint64_t hi = parse_u64(text.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty seed range");
        if (hi - lo >= 1000000) throw std::invalid_argument("seed range too large");
        for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        out.push_back(parse_u64(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diffusion sampler and sampler-scheduler toolkit", "diffsched"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "base seed");
    app.add_option("--dim", g.dim, "sample dimension");
    app.add_option("--oracle", g.oracle, "gaussian:<sigma_data> or gmm:<path>");
    app.add_option("--sigma-min", g.sigma_min);
    app.add_option("--sigma-max", g.sigma_max);
    app.add_option("--rho", g.rho);
    app.add_option("--schedule-mode", g.schedule_mode, "regenerate or slice")
        ->check(CLI::IsMember({"regenerate", "slice"}));
    app.add_flag("--append-zero", g.append_zero, "end the ladder at sigma = 0");
    app.add_option("--out", g.out, "CSV output path (default stdout)");
    app.add_option("--svg", g.svg, "SVG chart output path");
    app.add_flag("--carry-history", g.carry_history, "keep multistep history across segments");
    app.add_option("--dpm2a-variant", g.dpm2a_variant, "literal or ancestral")->check(CLI::IsMember({"literal", "ancestral"}));
    app.add_flag("--no-timing", g.no_timing, "leave wall_time_ms empty");
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* run = app.add_subcommand("run", "one spec, one seed: metrics and trajectory");
    std::string spec_text, preset_name, trajectory_path;
    int preset_n = 1;
    run->add_option("--spec", spec_text, "e.g. dpm2_a:2+dpm2:4");
    run->add_option("--preset", preset_name, "named configuration");
    run->add_option("--N", preset_n, "preset size (NFE = 6N)")->check(CLI::PositiveNumber);
    run->add_option("--trajectory", trajectory_path, "trajectory CSV path (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "specs x N x seeds, sliced W2 against ground truth");
    std::vector<std::string> presets, specs;
    std::vector<int> sweep_n{1};
    std::string seeds = "0";
    int samples = 1000, projections = 64;
    sweep->add_option("--preset", presets, "all, best, singles or a preset name")->delimiter(',');
    sweep->add_option("--spec", specs, "spec, with N / kN step templates");
    sweep->add_option("--N", sweep_n)->delimiter(',');
    sweep->add_option("--seeds", seeds, "a..b or a,b,c");
    sweep->add_option("--samples", samples, "trajectories per seed");
    sweep->add_option("--projections", projections, "sliced W2 directions");

    auto* conv = app.add_subcommand("convergence", "order study on the Gaussian oracle");
    std::vector<std::string> samplers{"euler", "heun", "dpm2", "dpmpp2m"};
    std::vector<int> conv_n{8, 16, 32, 64, 128, 256};
    bool cold_start = false;
    conv->add_option("--sampler", samplers)->delimiter(',');
    conv->add_option("--N", conv_n)->delimiter(',');
    conv->add_flag("--cold-start", cold_start, "no warm-start history for multistep samplers");

    auto* self = app.add_subcommand("selfcheck", "run the acceptance checks");
    bool full = false;
    std::string gmm;
    self->add_flag("--full", full, "include the mixture trend study");
    self->add_option("--gmm", gmm, "mixture file for the trend study");

    std::vector<const char*> argv{"diffsched"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*run) return cmd_run(g, spec_text, preset_name, preset_n, trajectory_path, out);
        if (*sweep) return cmd_sweep(g, presets, specs, sweep_n, seeds, samples, projections, out);
        if (*conv) return cmd_convergence(g, samplers, conv_n, cold_start, out, err);
        if (*self) return cmd_selfcheck(g, full, gmm, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace diffsched::cli
