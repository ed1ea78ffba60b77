#include "diffsched/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

#include "diffsched/metrics.hpp"

namespace diffsched {

double karras_extension_below_zero(int n_intervals, double sigma_min, double sigma_max, double rho) {
    if (n_intervals < 1) throw std::invalid_argument("need at least one step");
    const double a = std::pow(sigma_max, 1.0 / rho);
    const double b = std::pow(sigma_min, 1.0 / rho);
    return std::pow(a - (b - a) / n_intervals, rho);
}

ConvergenceResult convergence_study(SamplerKind kind, const ConvergenceConfig& config) {
    if (sampler_class(kind) != SamplerClass::Ode)
        throw std::invalid_argument("convergence study needs a deterministic sampler");
    if (config.step_counts.size() < 3) throw std::invalid_argument("need at least three step counts");
    const auto& opt = config.schedule;
    const double sd2 = config.sigma_data * config.sigma_data;
    const DenoiserOracle denoiser = gaussian_denoiser(config.sigma_data);
    const Vector x0 = initial_draw(config.seed, config.dim, opt.sigma_max);

    ConvergenceResult result;
    result.kind = kind;
    std::vector<double> errors;
    for (int n : config.step_counts) {
        ScheduleSpec spec{{Segment{kind, n}}, opt};
        RunOptions run;
        if (config.warm_start && is_multistep(kind)) {
            const int intervals = opt.append_zero ? n - 1 : n;
            const double s_prev = karras_extension_below_zero(intervals, opt.sigma_min, opt.sigma_max, opt.rho);
            const Vector x_prev = x0 * std::sqrt((sd2 + s_prev * s_prev) / (sd2 + opt.sigma_max * opt.sigma_max));
            run.initial_cache.store(Node::at(-1), CachedPrediction{denoiser(x_prev, s_prev), s_prev, Provenance::History});
        }
        const Trajectory traj = run_scheduler_from(spec, denoiser, x0, config.seed, run);
        const double sigma_end = traj.sigma_trace.back();
        const Vector exact = exact_gaussian_ode_endpoint(x0, opt.sigma_max, sigma_end, config.sigma_data);
        const double err = (traj.final_x() - exact).norm() / exact.norm();
        result.points.push_back(ConvergencePoint{n, traj.nfe, err});
        errors.push_back(err);
    }
    result.order = fit_convergence_order(config.step_counts, errors);
    return result;
}

std::string instantiate_spec_template(std::string_view raw, int n) {
    std::string compact;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    const std::string_view text = compact;
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t colon = text.find(':', pos);
        if (colon == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        out.append(text.substr(pos, colon + 1 - pos));
        std::size_t end = text.find('+', colon + 1);
        if (end == std::string_view::npos) end = text.size();
        std::string_view token = text.substr(colon + 1, end - colon - 1);
        if (!token.empty() && token.back() == 'N') {
            token.remove_suffix(1);
            long coeff = 1;
            if (!token.empty()) {
                std::size_t used = 0;
                coeff = std::stol(std::string(token), &used);
                if (used != token.size()) throw std::invalid_argument("bad step template");
            }
            out += std::to_string(coeff * n);
        } else {
            out.append(token);
        }
        if (end < text.size()) out += '+';
        pos = end + 1;
    }
    return out;
}

std::vector<SweepEntry> preset_entries(std::string_view selector, const ScheduleOptions& options) {
    std::vector<std::string> names;
    if (selector == "all") {
        names = preset_names();
    } else if (selector == "best") {
        names = best_preset_names();
    } else if (selector == "singles") {
        names = single_preset_names();
    } else {
        preset(selector, 1, options);
        names.emplace_back(selector);
    }
    std::vector<SweepEntry> entries;
    for (auto& name : names)
        entries.push_back(SweepEntry{name, [name, options](int n) { return preset(name, n, options); }});
    return entries;
}

SweepEntry spec_entry(const std::string& text, const ScheduleOptions& options) {
    parse_schedule_spec(instantiate_spec_template(text, 1), options);
    return SweepEntry{text, [text, options](int n) {
                          return parse_schedule_spec(instantiate_spec_template(text, n), options);
                      }};
}

Vector draw_reference(const OracleConfig& oracle, const GmmSpec* gmm, int dim, RngStream& stream) {
    if (oracle.kind == OracleConfig::Kind::Gmm) return sample_gmm(*gmm, stream);
    Vector v(dim);
    for (int d = 0; d < dim; ++d) v[d] = oracle.sigma_data * stream.next_gaussian();
    return v;
}

namespace {

std::string run_id(const std::string& label, int n, std::uint64_t seed) {
    return label + "@N" + std::to_string(n) + "/s" + std::to_string(seed);
}

}  // namespace

std::vector<RunRecord> run_sweep(const SweepConfig& config) {
    if (config.samples < 2) throw std::invalid_argument("sweep needs at least two samples per seed");
    const DenoiserOracle denoiser = make_oracle(config.oracle);
    std::optional<GmmSpec> gmm;
    int dim = config.dim;
    if (config.oracle.kind == OracleConfig::Kind::Gmm) {
        gmm = GmmSpec::load(config.oracle.gmm_path);
        if (dim != static_cast<int>(gmm->dim()))
            throw std::invalid_argument("--dim " + std::to_string(dim) + " does not match the mixture dimension " +
                                        std::to_string(gmm->dim()));
    }

    struct Task {
        std::size_t entry;
        int n;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t e = 0; e < config.entries.size(); ++e)
        for (int n : config.n_values)
            for (std::uint64_t s : config.seeds) tasks.push_back(Task{e, n, s});

    std::vector<RunRecord> records(tasks.size());
    std::vector<std::exception_ptr> failures(tasks.size());
    auto work = [&](std::size_t t) {
        const auto started = std::chrono::steady_clock::now();
        const Task& task = tasks[t];
        const SweepEntry& entry = config.entries[task.entry];
        const ScheduleSpec spec = entry.make(task.n);
        std::vector<Vector> generated, reference;
        generated.reserve(config.samples);
        reference.reserve(config.samples);
        for (int j = 0; j < config.samples; ++j) {
            generated.push_back(sample_final(spec, denoiser, derive_seed(task.seed, j), dim, config.run));
            RngStream stream = derive_stream(task.seed, StreamPurpose::ReferenceDraw, j);
            reference.push_back(draw_reference(config.oracle, gmm ? &*gmm : nullptr, dim, stream));
        }
        const double value = sliced_w2(SampleBatch::from_rows(generated), SampleBatch::from_rows(reference),
                                       config.projections, task.seed);
        RunRecord rec;
        rec.run_id = run_id(entry.label, task.n, task.seed);
        rec.spec_text = spec.text();
        rec.seed = task.seed;
        rec.dim = dim;
        rec.oracle_label = config.oracle.label;
        rec.nfe = nfe_total(spec);
        rec.metric_name = "sliced_w2";
        rec.metric_value = value;
        if (config.timing)
            rec.wall_time_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        records[t] = std::move(rec);
    };

    const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(tasks.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
            try {
                work(t);
            } catch (...) {
                failures[t] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return records;
}

std::vector<ChartSeries> aggregate_by_spec(const std::vector<RunRecord>& records,
                                           const std::vector<SweepEntry>& entries) {
    std::vector<ChartSeries> out;
    for (const auto& entry : entries) {
        ChartSeries series;
        series.label = entry.label;
        const std::string prefix = entry.label + "@N";
        std::vector<std::pair<int, std::pair<double, int>>> acc;  // nfe -> (sum, count)
        for (const auto& r : records) {
            if (r.run_id.compare(0, prefix.size(), prefix) != 0) continue;
            auto it = std::find_if(acc.begin(), acc.end(), [&](const auto& a) { return a.first == r.nfe; });
            if (it == acc.end()) {
                acc.push_back({r.nfe, {r.metric_value, 1}});
            } else {
                it->second.first += r.metric_value;
                it->second.second += 1;
            }
        }
        std::sort(acc.begin(), acc.end());
        for (const auto& [nfe, sc] : acc) {
            series.x.push_back(nfe);
            series.y.push_back(sc.first / sc.second);
        }
        out.push_back(std::move(series));
    }
    return out;
}

}  // namespace diffsched
