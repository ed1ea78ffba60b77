#include "diffsched/verify/criteria.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "diffsched/metrics.hpp"
#include "diffsched/oracle.hpp"
#include "diffsched/samplers.hpp"
#include "diffsched/scheduler.hpp"
#include "diffsched/studies.hpp"
#include "diffsched/verify/numerics.hpp"
#include "diffsched/verify/reference_rows.hpp"

namespace diffsched::verify {

namespace {

struct Verdict {
    bool passed = false;
    std::string detail;
};

template <class Fn>
CheckResult timed(std::string id, std::string name, double limit_seconds, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r{std::move(id), std::move(name), false, {}, 0.0};
    try {
        Verdict v = fn();
        r.passed = v.passed;
        r.detail = std::move(v.detail);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0 && r.seconds > limit_seconds) {
        r.passed = false;
        r.detail += "; exceeded time limit of " + std::to_string(limit_seconds) + " s";
    }
    return r;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

class Draws {
  public:
    explicit Draws(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    double normal() { return normal_(gen_); }
    Vector normal_vec(Eigen::Index dim) {
        Vector v(dim);
        for (Eigen::Index d = 0; d < dim; ++d) v[d] = normal();
        return v;
    }
    bool coin() { return uniform(0.0, 1.0) < 0.5; }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_;
};

struct Window {
    double prev;
    double sigma;
    double next;
};

Window random_window(Draws& r) {
    const double s = r.log_uniform(0.01, 80.0);
    return Window{s / r.uniform(0.05, 0.95), s, s * r.uniform(0.05, 0.95)};
}

GmmSpec random_gmm(Draws& r, Eigen::Index dim) {
    std::vector<GmmComponent> comps;
    std::vector<double> w{r.uniform(0.2, 1.0), r.uniform(0.2, 1.0), r.uniform(0.2, 1.0)};
    const double total = w[0] + w[1] + w[2];
    for (double wk : w) comps.push_back(GmmComponent{wk / total, 2.0 * r.normal_vec(dim), r.uniform(0.3, 1.5)});
    return GmmSpec(std::move(comps));
}

bool bitwise_equal(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

StepResult generic_step(SamplerKind kind, const RowInputs& in, std::int64_t i, const DenoiserOracle& D,
                        Dpm2aVariant variant, double correction_scale = 1.0) {
    PredictionCache cache;
    if (in.prev_denoised.size() > 0)
        cache.store(Node::at(i - 1), CachedPrediction{in.prev_denoised, in.sigma_prev, Provenance::History});
    StepOptions opt;
    opt.dpm2a_variant = variant;
    opt.correction_scale = correction_scale;
    SampleState state{in.x, i, in.sigma};
    NoiseDraw noise{in.eps};
    return take_step(kind, state, in.sigma_next, D, cache, &noise, opt);
}

}  // namespace

CheckResult check_coefficient_normalization() {
    return timed("AC1", "coefficient normalization", 1.0, [] {
        Draws r(101);
        double worst = 0.0;
        long cases = 0;
        for (SamplerKind kind : kAllSamplerKinds) {
            for (int c = 0; c < 1000; ++c) {
                const Window w = random_window(r);
                const bool history = r.coin();
                const double next = c % 10 == 0 ? 0.0 : w.next;
                CoefficientOptions opt;
                opt.dpm2a_variant = r.coin() ? Dpm2aVariant::Literal : Dpm2aVariant::Ancestral;
                if (has_correction_term(kind) && r.coin()) opt.correction_scale = r.uniform(0.0, 3.0);
                SigmaWindow sw{history ? std::optional<double>(w.prev) : std::nullopt, w.sigma, next};
                const CoeffVector cv = coefficient_vector(kind, r.integer(0, 200), sw, history, opt);
                worst = std::max(worst, std::abs(cv.sum() - 1.0));
                ++cases;
            }
        }
        return Verdict{worst <= 1e-12, std::to_string(cases) + " windows, max |sum - 1| = " + sci(worst)};
    });
}

CheckResult check_generic_vs_concrete() {
    return timed("AC2", "generic step matches the per-sampler rows", 5.0, [] {
        Draws r(202);
        const Eigen::Index dim = 3;
        const DenoiserOracle D = gmm_denoiser(random_gmm(r, dim));
        std::ostringstream detail;
        bool ok = true;
        struct Case {
            SamplerKind kind;
            Dpm2aVariant variant;
            const char* label;
        };
        const std::vector<Case> cases = {
            {SamplerKind::Euler, Dpm2aVariant::Literal, "euler"},
            {SamplerKind::Heun, Dpm2aVariant::Literal, "heun"},
            {SamplerKind::Dpm2, Dpm2aVariant::Literal, "dpm2"},
            {SamplerKind::DpmPP2M, Dpm2aVariant::Literal, "dpmpp2m"},
            {SamplerKind::EulerA, Dpm2aVariant::Literal, "euler_a"},
            {SamplerKind::DpmPPSDE, Dpm2aVariant::Literal, "dpmpp_sde"},
            {SamplerKind::DpmPP2SA, Dpm2aVariant::Literal, "dpmpp_2s_a"},
            {SamplerKind::DpmPP2MSDE, Dpm2aVariant::Literal, "dpmpp_2m_sde"},
            {SamplerKind::Dpm2A, Dpm2aVariant::Literal, "dpm2_a(literal)"},
            {SamplerKind::Dpm2A, Dpm2aVariant::Ancestral, "dpm2_a(ancestral)"},
        };
        for (const auto& c : cases) {
            double worst = 0.0;
            for (int k = 0; k < 1000; ++k) {
                const Window w = random_window(r);
                RowInputs in;
                in.sigma = w.sigma;
                in.sigma_next = w.next;
                in.x = 2.0 * r.normal_vec(dim) + w.sigma * r.normal_vec(dim);
                in.eps = r.normal_vec(dim);
                if (r.coin()) {
                    in.prev_denoised = 2.0 * r.normal_vec(dim);
                    in.sigma_prev = w.prev;
                }
                const std::int64_t i = r.integer(1, 100);
                const Vector generic = generic_step(c.kind, in, i, D, c.variant).state.x;
                const Vector direct = reference_row(c.kind, in, D, c.variant);
                worst = std::max(worst, (generic - direct).norm() / direct.norm());
            }
            ok = ok && worst <= 1e-9;
            detail << c.label << "=" << sci(worst) << " ";
        }
        return Verdict{ok, "max relative error over 1000 cases each: " + detail.str()};
    });
}

CheckResult check_degeneracy_identity() {
    return timed("AC3", "dpmpp_sde at correction scale 2 equals dpmpp_2s_a", 0.0, [] {
        Draws r(303);
        const Eigen::Index dim = 3;
        const DenoiserOracle D = gmm_denoiser(random_gmm(r, dim));
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Window w = random_window(r);
            RowInputs in;
            in.sigma = w.sigma;
            in.sigma_next = w.next;
            in.x = 2.0 * r.normal_vec(dim) + w.sigma * r.normal_vec(dim);
            in.eps = r.normal_vec(dim);
            const std::int64_t i = r.integer(0, 100);
            const Vector a = generic_step(SamplerKind::DpmPPSDE, in, i, D, Dpm2aVariant::Literal, 2.0).state.x;
            const Vector b = generic_step(SamplerKind::DpmPP2SA, in, i, D, Dpm2aVariant::Literal).state.x;
            worst = std::max(worst, (a - b).norm() / std::max(1.0, b.norm()));
        }
        return Verdict{worst <= 1e-12, "1000 shared-noise cases, max deviation " + sci(worst)};
    });
}

CheckResult check_noise_contract() {
    return timed("AC4", "noise contract with a perfect denoiser", 30.0, [] {
        Draws r(404);
        const Eigen::Index dim = 3;
        double worst_ode = 0.0;
        for (SamplerKind kind : kAllSamplerKinds) {
            if (sampler_class(kind) != SamplerClass::Ode) continue;
            for (int k = 0; k < 1000; ++k) {
                const Window w = random_window(r);
                const double next = k % 10 == 0 ? 0.0 : w.next;
                const Vector x0 = 2.0 * r.normal_vec(dim);
                const DenoiserOracle D = constant_denoiser(x0);
                const Vector eps = r.normal_vec(dim);
                RowInputs in;
                in.sigma = w.sigma;
                in.sigma_next = next;
                in.x = x0 + w.sigma * eps;
                if (r.coin()) {
                    in.prev_denoised = x0;
                    in.sigma_prev = w.prev;
                }
                const Vector out = generic_step(kind, in, r.integer(1, 50), D, Dpm2aVariant::Literal).state.x;
                worst_ode = std::max(worst_ode, (out - (x0 + next * eps)).lpNorm<Eigen::Infinity>());
            }
        }
        std::ostringstream detail;
        detail << "ODE max |x' - (x0 + s' eps)| = " << sci(worst_ode) << "; SDE std/s':";
        bool ok = worst_ode <= 1e-12;
        const int draws = 100000;
        const double s = 2.0, t = 0.8;
        Vector x0(1);
        x0 << 0.7;
        const DenoiserOracle D = constant_denoiser(x0);
        for (SamplerKind kind : kAllSamplerKinds) {
            if (sampler_class(kind) != SamplerClass::Sde) continue;
            for (Dpm2aVariant variant : {Dpm2aVariant::Literal, Dpm2aVariant::Ancestral}) {
                if (kind != SamplerKind::Dpm2A && variant == Dpm2aVariant::Ancestral) continue;
                Draws noise(505 + static_cast<int>(kind));
                double sum = 0.0, sum_sq = 0.0;
                for (int k = 0; k < draws; ++k) {
                    RowInputs in;
                    in.sigma = s;
                    in.sigma_next = t;
                    in.x = x0 + s * noise.normal_vec(1);
                    in.eps = noise.normal_vec(1);
                    const double dev = generic_step(kind, in, 1, D, variant).state.x[0] - x0[0];
                    sum += dev;
                    sum_sq += dev * dev;
                }
                const double mean = sum / draws;
                const double sd = std::sqrt((sum_sq - draws * mean * mean) / (draws - 1));
                const double ratio = sd / t;
                ok = ok && std::abs(ratio - 1.0) <= 0.01;
                detail << " " << canonical_name(kind)
                       << (kind == SamplerKind::Dpm2A ? "(" + std::string(dpm2a_variant_name(variant)) + ")" : "")
                       << "=" << sci(ratio);
            }
        }
        return Verdict{ok, detail.str()};
    });
}

CheckResult check_convergence_orders() {
    return timed("AC5", "convergence orders on the Gaussian endpoint problem", 30.0, [] {
        ConvergenceConfig cfg;
        std::ostringstream detail;
        bool ok = true;
        struct Want {
            SamplerKind kind;
            double lo;
            double hi;
        };
        for (const Want& w : {Want{SamplerKind::Euler, 0.8, 1.2}, Want{SamplerKind::Heun, 1.7, 1e9},
                              Want{SamplerKind::Dpm2, 1.7, 1e9}, Want{SamplerKind::DpmPP2M, 1.7, 1e9}}) {
            const ConvergenceResult res = convergence_study(w.kind, cfg);
            const bool in_range = res.order >= w.lo && res.order <= w.hi;
            ok = ok && in_range;
            detail << canonical_name(w.kind) << "=" << sci(res.order) << " ";
        }
        ConvergenceConfig cold = cfg;
        cold.warm_start = false;
        detail << "(dpmpp2m cold start " << sci(convergence_study(SamplerKind::DpmPP2M, cold).order) << ")";
        return Verdict{ok, "slopes: " + detail.str()};
    });
}

CheckResult check_scheduler_identities() {
    return timed("AC6", "scheduler identities and NFE accounting", 0.0, [] {
        Draws r(606);
        const int dim = 3;
        const DenoiserOracle D = gmm_denoiser(random_gmm(r, dim));
        std::ostringstream detail;
        bool ok = true;

        int loop_mismatch = 0;
        for (bool zero : {false, true}) {
            for (SamplerKind kind : kAllSamplerKinds) {
                const int n = 7;
                const std::uint64_t seed = 11;
                ScheduleOptions opt;
                opt.append_zero = zero;
                ScheduleSpec spec{{Segment{kind, n}}, opt};
                const Trajectory traj = run_scheduler(spec, D, seed, dim);

                const NoiseSchedule sched = zero ? karras_schedule(n, opt.sigma_min, opt.sigma_max, opt.rho, true)
                                                 : karras_schedule(n + 1, opt.sigma_min, opt.sigma_max, opt.rho, false);
                RngStream init = derive_stream(seed, StreamPurpose::InitNoise, 0);
                Vector x(dim);
                for (int d = 0; d < dim; ++d) x[d] = opt.sigma_max * init.next_gaussian();
                PredictionCache cache;
                bool same = bitwise_equal(traj.states[0].x, x);
                for (std::size_t i = 0; i + 1 < sched.size(); ++i) {
                    RngStream stream = derive_stream(seed, StreamPurpose::StepNoise, i);
                    const NoiseDraw noise = NoiseDraw::draw(stream, dim);
                    SampleState state{x, static_cast<std::int64_t>(i), sched[i]};
                    StepResult step = take_step(kind, state, sched[i + 1], D, cache, &noise);
                    x = step.state.x;
                    cache = std::move(step.cache);
                    same = same && bitwise_equal(traj.states[i + 1].x, x);
                }
                same = same && traj.states.size() == sched.size();
                if (!same) {
                    ++loop_mismatch;
                    detail << "[loop mismatch " << canonical_name(kind) << (zero ? "+zero" : "") << "] ";
                }
            }
        }
        ok = ok && loop_mismatch == 0;
        detail << "single segment vs bare loop: " << (loop_mismatch == 0 ? "identical" : "DIFFER") << "; ";

        int slice_mismatch = 0, slice_cases = 0;
        for (bool zero : {false, true}) {
            for (const char* name : {"euler", "euler_a"}) {
                ScheduleOptions opt;
                opt.append_zero = zero;
                opt.mode = ScheduleMode::Slice;
                const int n = 10;
                const std::string whole_text = std::string(name) + ":" + std::to_string(n);
                const Trajectory whole = run_scheduler(parse_schedule_spec(whole_text, opt), D, 5, dim);
                for (int k = 1; k < n; ++k) {
                    const std::string text = std::string(name) + ":" + std::to_string(k) + "+" + name + ":" +
                                             std::to_string(n - k);
                    const Trajectory split = run_scheduler(parse_schedule_spec(text, opt), D, 5, dim);
                    bool same = split.states.size() == whole.states.size();
                    for (std::size_t j = 0; same && j < whole.states.size(); ++j)
                        same = bitwise_equal(split.states[j].x, whole.states[j].x);
                    ++slice_cases;
                    if (!same) ++slice_mismatch;
                }
            }
        }
        ok = ok && slice_mismatch == 0;
        detail << "slice split vs whole: " << slice_cases - slice_mismatch << "/" << slice_cases << " identical; ";

        auto counter = std::make_shared<std::atomic<long>>(0);
        const DenoiserOracle counting(
            [counter, base = gaussian_denoiser(1.0)](const Vector& x, double sigma) {
                counter->fetch_add(1);
                return base(x, sigma);
            },
            "counting");
        int nfe_bad = 0, nfe_cases = 0;
        for (const auto& name : preset_names()) {
            for (int n = 1; n <= 5; ++n) {
                const ScheduleSpec spec = preset(name, n);
                counter->store(0);
                const Trajectory traj = run_scheduler(spec, counting, 3, 1);
                ++nfe_cases;
                if (nfe_total(spec) != 6 * n || traj.nfe != 6 * n || counter->load() != 6 * n) {
                    ++nfe_bad;
                    if (nfe_bad <= 3) detail << "[nfe " << name << " N=" << n << ": " << traj.nfe << "] ";
                }
            }
        }
        ok = ok && nfe_bad == 0;
        detail << "NFE = 6N for " << nfe_cases - nfe_bad << "/" << nfe_cases << " preset runs";
        return Verdict{ok, detail.str()};
    });
}

CheckResult check_oracle_correctness() {
    return timed("AC7", "oracle correctness", 0.0, [] {
        std::ostringstream detail;
        bool ok = true;

        Vector mu_a(1), mu_b(1);
        mu_a << -2.0;
        mu_b << 2.0;
        const GmmSpec line({GmmComponent{0.5, mu_a, 0.1}, GmmComponent{0.5, mu_b, 0.1}});
        const DenoiserOracle d1 = gmm_denoiser(line);
        double worst_q = 0.0;
        for (double x : {-3.0, -1.0, 0.5, 2.2})
            for (double sigma : {0.05, 0.3, 1.0, 5.0}) {
                Vector v(1);
                v << x;
                worst_q = std::max(worst_q, std::abs(d1(v, sigma)[0] - gmm_tweedie_quadrature_1d(line, x, sigma)));
            }
        ok = ok && worst_q <= 1e-6;
        detail << "tweedie vs quadrature " << sci(worst_q) << "; ";

        const GmmSpec plane = two_mode_gmm();
        const DenoiserOracle d2 = gmm_denoiser(plane);
        Draws r(707);
        double worst_s = 0.0;
        for (int k = 0; k < 60; ++k) {
            const double sigma = r.log_uniform(0.05, 10.0);
            const Vector x = 2.0 * r.normal_vec(2);
            const Vector fd = finite_difference_gradient(
                [&](const Vector& y) { return gmm_perturbed_log_density(plane, y, sigma); }, x, 1e-4);
            const Vector score = score_from_denoiser(d2, x, sigma);
            worst_s = std::max(worst_s, (score - fd).lpNorm<Eigen::Infinity>());
        }
        ok = ok && worst_s <= 1e-5;
        detail << "score vs finite differences " << sci(worst_s) << "; ";

        const DenoiserOracle dg = gaussian_denoiser(1.0);
        double worst_e = 0.0;
        struct Span {
            double from;
            double to;
        };
        for (const Span& span : {Span{5.0, 0.5}, Span{2.0, 0.01}, Span{10.0, 1.0}}) {
            const Vector x = span.from * r.normal_vec(3);
            const Vector exact = exact_gaussian_ode_endpoint(x, span.from, span.to, 1.0);
            const Vector fine = fine_grid_euler(dg, x, span.from, span.to, 100000);
            worst_e = std::max(worst_e, (exact - fine).norm() / exact.norm());
        }
        ok = ok && worst_e <= 1e-4;
        detail << "gaussian endpoint vs 1e5-step Euler " << sci(worst_e);
        return Verdict{ok, detail.str()};
    });
}

CheckResult check_scheduling_trend(const TrendOptions& options) {
    return timed("AC8", "scheduling trend on a two-mode mixture", 300.0, [&] {
        SweepConfig cfg;
        cfg.oracle = parse_oracle_flag("gmm:" + options.gmm_path);
        cfg.dim = 2;
        cfg.n_values = {options.n};
        cfg.seeds.clear();
        for (int s = 0; s < options.seeds; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        cfg.samples = options.samples;
        cfg.projections = options.projections;
        cfg.jobs = options.jobs;
        cfg.timing = false;
        const ScheduleOptions sched;
        for (auto& e : preset_entries("singles", sched)) cfg.entries.push_back(std::move(e));
        const std::size_t n_singles = cfg.entries.size();
        for (auto& e : preset_entries("best", sched)) cfg.entries.push_back(std::move(e));
        const auto records = run_sweep(cfg);
        const auto series = aggregate_by_spec(records, cfg.entries);

        std::ostringstream detail;
        bool all_finite = true;
        double best_single = std::numeric_limits<double>::infinity();
        std::string best_single_name;
        double best_preset = std::numeric_limits<double>::infinity();
        std::string best_preset_name;
        for (std::size_t k = 0; k < series.size(); ++k) {
            const bool finite = series[k].y.size() == 1 && std::isfinite(series[k].y[0]);
            all_finite = all_finite && finite;
            const double v = finite ? series[k].y[0] : std::numeric_limits<double>::infinity();
            detail << series[k].label << "=" << sci(v) << " ";
            if (k < n_singles && v < best_single) best_single = v, best_single_name = series[k].label;
            if (k >= n_singles && v < best_preset) best_preset = v, best_preset_name = series[k].label;
        }
        const bool close = best_preset <= 1.1 * best_single;
        detail << "| best single " << best_single_name << ", best scheduled " << best_preset_name
               << " ratio " << sci(best_preset / best_single);
        return Verdict{all_finite && close, detail.str()};
    });
}

CheckResult check_sweep_determinism() {
    return timed("AC9", "sweep determinism", 0.0, [] {
        SweepConfig cfg;
        cfg.oracle = parse_oracle_flag("gaussian:1");
        cfg.dim = 2;
        cfg.n_values = {1, 2};
        cfg.seeds = {0, 1, 2};
        cfg.samples = 64;
        cfg.timing = false;
        cfg.entries.push_back(spec_entry("dpm2_a:N+dpm2:2N", ScheduleOptions{}));
        for (auto& e : preset_entries("dpmpp_sde", ScheduleOptions{})) cfg.entries.push_back(std::move(e));
        const std::string first = records_csv(run_sweep(cfg));
        cfg.jobs = 3;
        const std::string second = records_csv(run_sweep(cfg));
        const bool same = first == second;
        return Verdict{same, std::string(same ? "identical" : "different") + " CSV across runs with 1 and 3 jobs (" +
                                 std::to_string(first.size()) + " bytes)"};
    });
}

std::vector<CheckResult> run_suite(const SuiteOptions& options) {
    std::vector<CheckResult> out;
    auto record = [&](CheckResult r) {
        if (options.on_result) options.on_result(r);
        out.push_back(std::move(r));
    };
    record(check_coefficient_normalization());
    record(check_generic_vs_concrete());
    record(check_degeneracy_identity());
    record(check_noise_contract());
    record(check_convergence_orders());
    record(check_scheduler_identities());
    record(check_oracle_correctness());
    if (options.include_trend) record(check_scheduling_trend(options.trend));
    record(check_sweep_determinism());
    return out;
}

std::string format_result(const CheckResult& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
    return std::string(r.passed ? "PASS" : "FAIL") + " [" + r.id + "] " + r.name + " (" + secs + " s): " + r.detail;
}

}  // namespace diffsched::verify
