#include "diffsched/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace diffsched {

SamplerClass sampler_class(SamplerKind kind) noexcept {
    switch (kind) {
        case SamplerKind::Euler:
        case SamplerKind::Heun:
        case SamplerKind::Dpm2:
        case SamplerKind::DpmPP2M: return SamplerClass::Ode;
        default: return SamplerClass::Sde;
    }
}

std::string_view canonical_name(SamplerKind kind) noexcept {
    switch (kind) {
        case SamplerKind::Euler: return "euler";
        case SamplerKind::Heun: return "heun";
        case SamplerKind::Dpm2: return "dpm2";
        case SamplerKind::DpmPP2M: return "dpmpp2m";
        case SamplerKind::EulerA: return "euler_a";
        case SamplerKind::Dpm2A: return "dpm2_a";
        case SamplerKind::DpmPPSDE: return "dpmpp_sde";
        case SamplerKind::DpmPP2SA: return "dpmpp_2s_a";
        case SamplerKind::DpmPP2MSDE: return "dpmpp_2m_sde";
    }
    return "unknown";
}

std::optional<SamplerKind> parse_sampler_name(std::string_view name) noexcept {
    for (auto kind : kAllSamplerKinds) {
        if (canonical_name(kind) == name) return kind;
    }
    return std::nullopt;
}

bool is_multistep(SamplerKind kind) noexcept {
    return kind == SamplerKind::DpmPP2M || kind == SamplerKind::DpmPP2MSDE;
}

bool has_correction_term(SamplerKind kind) noexcept {
    switch (kind) {
        case SamplerKind::Euler:
        case SamplerKind::EulerA:
        case SamplerKind::DpmPP2SA: return false;
        default: return true;
    }
}

int nfe_cost(SamplerKind kind, bool is_final_zero_step) noexcept {
    switch (kind) {
        case SamplerKind::Euler:
        case SamplerKind::EulerA:
        case SamplerKind::DpmPP2M:
        case SamplerKind::DpmPP2MSDE: return 1;
        default: return is_final_zero_step ? 1 : 2;
    }
}

CoeffVector::CoeffVector(std::initializer_list<Entry> entries) {
    for (const auto& [node, w] : entries) add(node, w);
}

void CoeffVector::add(Node node, double weight) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), node,
                               [](const Entry& e, const Node& n) { return e.first < n; });
    if (it != entries_.end() && it->first == node) {
        it->second += weight;
    } else {
        entries_.insert(it, Entry{node, weight});
    }
}

double CoeffVector::weight(Node node) const noexcept {
    for (const auto& [n, w] : entries_) {
        if (n == node) return w;
    }
    return 0.0;
}

double CoeffVector::sum() const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += e.second;
    return s;
}

std::string_view dpm2a_variant_name(Dpm2aVariant v) noexcept {
    return v == Dpm2aVariant::Literal ? "literal" : "ancestral";
}

Dpm2aVariant parse_dpm2a_variant(std::string_view text) {
    if (text == "literal") return Dpm2aVariant::Literal;
    if (text == "ancestral") return Dpm2aVariant::Ancestral;
    throw std::invalid_argument("unknown dpm2_a variant '" + std::string(text) + "' (literal|ancestral)");
}

namespace {

/// 1/(2r) with r = h_last / h in log-sigma time.
double multistep_ratio(double prev, double cur, double next) {
    return 0.5 * std::log(cur / next) / std::log(prev / cur);
}

}  // namespace

CoeffVector coefficient_vector(SamplerKind kind, std::int64_t i, const SigmaWindow& sigmas, bool history_available,
                               const CoefficientOptions& options) {
    const double s = sigmas.current;
    const double t = sigmas.next;
    if (!(s > 0.0) || t < 0.0 || !(s > t)) {
        throw std::invalid_argument("coefficient window needs sigma_i > sigma_{i+1} >= 0");
    }
    if (history_available && is_multistep(kind)) {
        if (!sigmas.prev || !(*sigmas.prev > s)) {
            throw std::invalid_argument("coefficient window needs sigma_{i-1} > sigma_i");
        }
    }
    if (options.correction_scale != 1.0 && !has_correction_term(kind)) {
        throw std::invalid_argument(std::string(canonical_name(kind)) + " has no correction term to scale");
    }

    const Node cur = Node::at(i);
    if (t == 0.0) return CoeffVector{{cur, 1.0}};

    CoeffVector c;
    switch (kind) {
        case SamplerKind::Euler:
        case SamplerKind::EulerA: c.add(cur, 1.0); break;
        case SamplerKind::Heun: {
            const double w = s / (2.0 * t);
            c.add(cur, 1.0 - w);
            c.add(Node::at(i + 1), w);
            break;
        }
        case SamplerKind::Dpm2: {
            const double w = std::sqrt(s / t);
            c.add(cur, 1.0 - w);
            c.add(Node::between(FractionalNode(i, 0.5)), w);
            break;
        }
        case SamplerKind::DpmPP2M:
        case SamplerKind::DpmPP2MSDE: {
            if (!history_available) {
                c.add(cur, 1.0);
                break;
            }
            const double w = multistep_ratio(*sigmas.prev, s, t);
            c.add(cur, 1.0 + w);
            c.add(Node::at(i - 1), -w);
            break;
        }
        case SamplerKind::DpmPPSDE:
            c.add(cur, 0.5);
            c.add(Node::at(i + 1), 0.5);
            break;
        case SamplerKind::DpmPP2SA: c.add(Node::at(i + 1), 1.0); break;
        case SamplerKind::Dpm2A: {
            if (options.dpm2a_variant == Dpm2aVariant::Ancestral) {
                const double w = s / t;
                c.add(cur, 1.0 - w);
                c.add(Node::at(i + 1), w);
            } else {
                const double w = s / (t * t);
                c.add(cur, 1.0 - w);
                c.add(Node::between(FractionalNode(i, 0.5)), w);
            }
            break;
        }
    }

    if (options.correction_scale != 1.0) {
        CoeffVector scaled;
        double others = 0.0;
        for (const auto& [node, w] : c) {
            if (node == cur) continue;
            scaled.add(node, options.correction_scale * w);
            others += options.correction_scale * w;
        }
        scaled.add(cur, 1.0 - others);
        return scaled;
    }
    return c;
}

Vector convert_prediction(const Vector& value, const Vector& x, double sigma, PredictionDirection direction) {
    if (!(sigma > 0.0)) throw std::invalid_argument("prediction conversion needs sigma > 0");
    if (value.size() != x.size()) throw std::invalid_argument("prediction and state differ in dimension");
    if (direction == PredictionDirection::DataToNoise) return (x - value) / sigma;
    return x - sigma * value;
}

Vector euler_baseline_estimate(const Vector& x_i, const Vector& d_i, double sigma_i, double sigma_target) {
    if (!(sigma_i > 0.0) || sigma_target < 0.0) throw std::invalid_argument("baseline estimate needs sigma_i > 0");
    if (sigma_target > sigma_i) throw std::invalid_argument("baseline estimate target lies above sigma_i");
    const double ratio = sigma_target / sigma_i;
    return ratio * x_i + (1.0 - ratio) * d_i;
}

NoiseDraw NoiseDraw::draw(RngStream& stream, Eigen::Index dim) {
    NoiseDraw n{Vector(dim)};
    for (Eigen::Index d = 0; d < dim; ++d) n.eps[d] = stream.next_gaussian();
    return n;
}

void PredictionCache::store(Node node, CachedPrediction prediction) {
    for (auto& [n, p] : entries_) {
        if (n == node) {
            p = std::move(prediction);
            return;
        }
    }
    entries_.emplace_back(node, std::move(prediction));
}

const CachedPrediction* PredictionCache::find(Node node) const noexcept {
    for (const auto& [n, p] : entries_) {
        if (n == node) return &p;
    }
    return nullptr;
}

namespace {

StepResult paradigm_step(SamplerKind kind, const SampleState& state, double sigma_next, const DenoiserOracle& denoiser,
                         const PredictionCache& cache, const NoiseDraw* noise, const StepOptions& options) {
    const double s = state.sigma;
    const double t = sigma_next;
    if (!(s > 0.0) || t < 0.0 || !(s > t)) throw std::invalid_argument("step needs sigma_i > sigma_next >= 0");
    const std::int64_t i = state.step_index;

    const CachedPrediction* prev = nullptr;
    if (is_multistep(kind)) {
        prev = cache.find(Node::at(i - 1));
        if (prev && prev->provenance != Provenance::History) prev = nullptr;
        if (!prev && options.expect_history) {
            throw ContractViolation(std::string(canonical_name(kind)) + " step " + std::to_string(i) +
                                    " expected history at node " + std::to_string(i - 1));
        }
    }

    SigmaWindow window{prev ? std::optional<double>(prev->sigma) : std::nullopt, s, t};
    CoeffVector c = coefficient_vector(kind, i, window, prev != nullptr,
                                       CoefficientOptions{options.correction_scale, options.dpm2a_variant});

    StepResult result;
    Vector d_i = denoiser(state.x, s);
    result.nfe = 1;

    Vector combined = Vector::Zero(state.x.size());
    for (const auto& [node, w] : c) {
        if (node == Node::at(i)) {
            combined += w * d_i;
        } else if (node.base < i) {
            combined += w * prev->value;
        } else {
            const double sigma_node = node.is_integer() ? t : sigma_interpolate(s, t, node.frac);
            const Vector x_hat = euler_baseline_estimate(state.x, d_i, s, sigma_node);
            combined += w * denoiser(x_hat, sigma_node);
            ++result.nfe;
        }
    }

    const double ratio = t / s;
    if (noise == nullptr) {
        result.state.x = ratio * state.x + (1.0 - ratio) * combined;
    } else {
        const double a = ratio * ratio;
        const double noise_scale = ratio * std::sqrt((s - t) * (s + t));
        result.state.x = a * state.x + (1.0 - a) * combined;
        if (noise_scale != 0.0) result.state.x += noise_scale * noise->eps;
    }
    result.state.step_index = i + 1;
    result.state.sigma = t;
    result.cache.store(Node::at(i), CachedPrediction{std::move(d_i), s, Provenance::History});
    result.coefficients = std::move(c);
    return result;
}

}  // namespace

StepResult ode_step(SamplerKind kind, const SampleState& state, double sigma_next, const DenoiserOracle& denoiser,
                    const PredictionCache& cache, const StepOptions& options) {
    if (sampler_class(kind) != SamplerClass::Ode) {
        throw std::invalid_argument(std::string(canonical_name(kind)) + " is not an ODE sampler");
    }
    if (options.correction_scale != 1.0) throw std::invalid_argument("correction_scale applies to SDE samplers only");
    return paradigm_step(kind, state, sigma_next, denoiser, cache, nullptr, options);
}

StepResult sde_step(SamplerKind kind, const SampleState& state, double sigma_next, const DenoiserOracle& denoiser,
                    const PredictionCache& cache, const NoiseDraw& noise, const StepOptions& options) {
    if (sampler_class(kind) != SamplerClass::Sde) {
        throw std::invalid_argument(std::string(canonical_name(kind)) + " is not an SDE sampler");
    }
    if (noise.eps.size() != state.x.size()) throw std::invalid_argument("noise dimension does not match state");
    return paradigm_step(kind, state, sigma_next, denoiser, cache, &noise, options);
}

StepResult take_step(SamplerKind kind, const SampleState& state, double sigma_next, const DenoiserOracle& denoiser,
                     const PredictionCache& cache, const NoiseDraw* noise, const StepOptions& options) {
    if (sampler_class(kind) == SamplerClass::Ode) return ode_step(kind, state, sigma_next, denoiser, cache, options);
    if (noise == nullptr) throw std::invalid_argument("SDE step needs a noise draw");
    return sde_step(kind, state, sigma_next, denoiser, cache, *noise, options);
}

}  // namespace diffsched
