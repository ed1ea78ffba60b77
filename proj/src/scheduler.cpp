#include "diffsched/scheduler.hpp"

#include <cctype>
#include <functional>

#include "diffsched/format.hpp"

namespace diffsched {

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::invalid_argument(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

int ScheduleSpec::total_steps() const noexcept {
    int total = 0;
    for (const auto& s : segments) total += s.steps;
    return total;
}

std::string ScheduleSpec::text() const {
    std::string out;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        if (k) out += '+';
        out += canonical_name(segments[k].kind);
        out += ':';
        out += std::to_string(segments[k].steps);
    }
    return out;
}

bool ScheduleSpec::ode_only() const noexcept {
    for (const auto& s : segments) {
        if (sampler_class(s.kind) == SamplerClass::Sde) return false;
    }
    return true;
}

namespace {

class SpecParser {
  public:
    explicit SpecParser(std::string_view text) : text_(text) {}

    std::vector<Segment> parse() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError("empty scheduler spec", pos_);
        std::vector<Segment> segments;
        segments.push_back(segment());
        skip_space();
        while (pos_ < text_.size()) {
            if (text_[pos_] != '+') throw ParseError("expected '+' between segments", pos_);
            ++pos_;
            segments.push_back(segment());
            skip_space();
        }
        return segments;
    }

  private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    Segment segment() {
        skip_space();
        const std::size_t name_start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const auto name = text_.substr(name_start, pos_ - name_start);
        if (name.empty()) throw ParseError("expected sampler name", name_start);
        const auto kind = parse_sampler_name(name);
        if (!kind) throw ParseError("unknown sampler '" + std::string(name) + "'", name_start);

        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != ':') throw ParseError("expected ':' after sampler name", pos_);
        ++pos_;
        skip_space();

        const std::size_t num_start = pos_;
        long long steps = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            steps = steps * 10 + (text_[pos_] - '0');
            if (steps > 1'000'000) throw ParseError("step count too large", num_start);
            ++pos_;
        }
        if (pos_ == num_start) throw ParseError("expected a positive step count", num_start);
        if (steps == 0) throw ParseError("step count must be positive", num_start);
        return Segment{*kind, static_cast<int>(steps)};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

ScheduleSpec parse_schedule_spec(std::string_view text, const ScheduleOptions& options) {
    return ScheduleSpec{SpecParser(text).parse(), options};
}

NoiseSchedule global_schedule(const ScheduleSpec& spec) {
    if (spec.segments.empty()) throw std::invalid_argument("scheduler spec has no segments");
    const auto& o = spec.options;
    const int total = spec.total_steps();
    return o.append_zero ? karras_schedule(total, o.sigma_min, o.sigma_max, o.rho, true)
                         : karras_schedule(total + 1, o.sigma_min, o.sigma_max, o.rho, false);
}

std::vector<NoiseSchedule> plan_segments(const ScheduleSpec& spec) {
    std::vector<int> steps;
    steps.reserve(spec.segments.size());
    for (const auto& s : spec.segments) steps.push_back(s.steps);
    return sub_schedule(global_schedule(spec), steps, spec.options.mode, spec.options.rho);
}

int nfe_total(const ScheduleSpec& spec) {
    int total = 0;
    for (std::size_t k = 0; k < spec.segments.size(); ++k) {
        const auto& seg = spec.segments[k];
        const bool last_segment = k + 1 == spec.segments.size();
        for (int j = 0; j < seg.steps; ++j) {
            const bool final_zero = spec.options.append_zero && last_segment && j + 1 == seg.steps;
            total += nfe_cost(seg.kind, final_zero);
        }
    }
    return total;
}

Vector initial_draw(std::uint64_t seed, int dim, double sigma_max) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    auto stream = derive_stream(seed, StreamPurpose::InitNoise, 0);
    return sigma_max * NoiseDraw::draw(stream, dim).eps;
}

namespace {

using StepObserver = std::function<void(const SampleState&, int segment, int nfe_so_far)>;

SampleState run_engine(const ScheduleSpec& spec, const DenoiserOracle& denoiser, Vector x0, std::uint64_t seed,
                       const RunOptions& options, std::vector<std::size_t>* boundaries, const StepObserver& observe) {
    const auto segments = plan_segments(spec);
    PredictionCache cache = options.initial_cache;
    SampleState state{std::move(x0), 0, segments.front()[0]};
    const auto dim = state.x.size();
    int nfe = 0;
    if (observe) observe(state, 0, nfe);

    const StepOptions step_options{false, 1.0, options.dpm2a_variant};
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto kind = spec.segments[k].kind;
        const auto& ladder = segments[k];
        if (k > 0) {
            if (!options.carry_history) cache.clear();
            if (boundaries) boundaries->push_back(static_cast<std::size_t>(state.step_index));
        }
        for (std::size_t j = 0; j + 1 < ladder.size(); ++j) {
            state.sigma = ladder[j];
            StepResult r;
            if (sampler_class(kind) == SamplerClass::Sde) {
                auto stream = derive_stream(seed, StreamPurpose::StepNoise, static_cast<std::uint64_t>(state.step_index));
                const auto noise = NoiseDraw::draw(stream, dim);
                r = sde_step(kind, state, ladder[j + 1], denoiser, cache, noise, step_options);
            } else {
                r = ode_step(kind, state, ladder[j + 1], denoiser, cache, step_options);
            }
            state = std::move(r.state);
            cache = std::move(r.cache);
            nfe += r.nfe;
            if (observe) observe(state, static_cast<int>(k), nfe);
        }
    }
    return state;
}

}  // namespace

Trajectory run_scheduler_from(const ScheduleSpec& spec, const DenoiserOracle& denoiser, Vector x0,
                              std::uint64_t seed, const RunOptions& options) {
    Trajectory traj;
    traj.seed = seed;
    const int steps = spec.total_steps();
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    auto observe = [&traj](const SampleState& s, int segment, int nfe) {
        traj.states.push_back(s);
        traj.sigma_trace.push_back(s.sigma);
        traj.segment_of_state.push_back(segment);
        traj.nfe_cumulative.push_back(nfe);
    };
    run_engine(spec, denoiser, std::move(x0), seed, options, &traj.segment_boundaries, observe);
    traj.nfe = traj.nfe_cumulative.back();
    return traj;
}

Trajectory run_scheduler(const ScheduleSpec& spec, const DenoiserOracle& denoiser, std::uint64_t seed, int dim,
                         const RunOptions& options) {
    const double sigma_max = global_schedule(spec)[0];
    return run_scheduler_from(spec, denoiser, initial_draw(seed, dim, sigma_max), seed, options);
}

Vector sample_final(const ScheduleSpec& spec, const DenoiserOracle& denoiser, std::uint64_t seed, int dim,
                    const RunOptions& options) {
    const double sigma_max = global_schedule(spec)[0];
    return run_engine(spec, denoiser, initial_draw(seed, dim, sigma_max), seed, options, nullptr, {}).x;
}

std::string trajectory_csv(const Trajectory& trajectory) {
    std::string out = "step,segment,sigma,nfe_cum";
    const auto dim = trajectory.states.empty() ? 0 : trajectory.states.front().x.size();
    for (Eigen::Index d = 0; d < dim; ++d) out += ",x_" + std::to_string(d);
    out += '\n';
    for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
        const auto& s = trajectory.states[i];
        out += std::to_string(s.step_index);
        out += ',';
        out += std::to_string(trajectory.segment_of_state[i]);
        out += ',';
        out += format_double(s.sigma);
        out += ',';
        out += std::to_string(trajectory.nfe_cumulative[i]);
        for (Eigen::Index d = 0; d < dim; ++d) {
            out += ',';
            out += format_double(s.x[d]);
        }
        out += '\n';
    }
    return out;
}

namespace {

struct PresetUnit {
    std::string_view token;
    SamplerKind kind;
};

constexpr PresetUnit kFirstUnits[] = {
    {"heun", SamplerKind::Heun},
    {"dpm2", SamplerKind::Dpm2},
    {"dpm2a", SamplerKind::Dpm2A},
    {"dpmpp2sa", SamplerKind::DpmPP2SA},
    {"dpmppsde", SamplerKind::DpmPPSDE},
};

constexpr PresetUnit kSecondUnits[] = {
    {"euler", SamplerKind::Euler},       {"eulera", SamplerKind::EulerA},     {"dpmpp2m", SamplerKind::DpmPP2M},
    {"heun", SamplerKind::Heun},         {"dpm2", SamplerKind::Dpm2},         {"dpm2a", SamplerKind::Dpm2A},
    {"dpmpp2sa", SamplerKind::DpmPP2SA}, {"dpmppsde", SamplerKind::DpmPPSDE},
};

struct PresetEntry {
    std::string name;
    SamplerKind first;
    SamplerKind second;  // unused for singles
    int first_multiplier;  // first-unit steps in units of N; 0 marks a single-sampler preset
};

const std::vector<PresetEntry>& preset_registry() {
    static const std::vector<PresetEntry> registry = [] {
        std::vector<PresetEntry> out;
        for (auto kind : kAllSamplerKinds) out.push_back({std::string(canonical_name(kind)), kind, kind, 0});
        for (int mult : {1, 2}) {
            for (const auto& a : kFirstUnits) {
                for (const auto& b : kSecondUnits) {
                    if (a.kind == b.kind) continue;
                    std::string name = std::string(a.token) + "-" + std::string(b.token);
                    if (mult == 2) name += "-2n";
                    out.push_back({std::move(name), a.kind, b.kind, mult});
                }
            }
        }
        return out;
    }();
    return registry;
}

}  // namespace

ScheduleSpec preset(std::string_view name, int n, const ScheduleOptions& options) {
    if (n < 1) throw std::invalid_argument("preset N must be positive");
    for (const auto& e : preset_registry()) {
        if (e.name != name) continue;
        ScheduleSpec spec;
        spec.options = options;
        const int budget = 6 * n;
        if (e.first_multiplier == 0) {
            spec.segments.push_back({e.first, budget / nfe_cost(e.first, false)});
        } else {
            const int first_steps = e.first_multiplier * n;
            const int remaining = budget - first_steps * nfe_cost(e.first, false);
            spec.segments.push_back({e.first, first_steps});
            spec.segments.push_back({e.second, remaining / nfe_cost(e.second, false)});
        }
        return spec;
    }
    std::string msg = "unknown preset '" + std::string(name) + "'; available:";
    for (const auto& e : preset_registry()) msg += " " + e.name;
    throw PresetNotFound(msg);
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& e : preset_registry()) out.push_back(e.name);
    return out;
}

std::vector<std::string> best_preset_names() {
    return {"dpm2a-dpm2", "dpm2a-dpmpp2m", "dpmpp2sa-dpm2", "dpmpp2sa-dpmpp2m", "dpmppsde-dpmpp2m", "dpmppsde-dpm2"};
}

std::vector<std::string> single_preset_names() {
    std::vector<std::string> out;
    for (auto kind : kAllSamplerKinds) out.emplace_back(canonical_name(kind));
    return out;
}

}  // namespace diffsched
