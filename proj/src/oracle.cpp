#include "diffsched/oracle.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "diffsched/format.hpp"
#include "diffsched/samplers.hpp"

namespace diffsched {

DenoiserOracle::DenoiserOracle(Function fn, std::string description)
    : fn_(std::make_shared<const Function>(std::move(fn))), description_(std::move(description)) {
    if (!*fn_) throw std::invalid_argument("denoiser function is empty");
}

DenoiserOracle gaussian_denoiser(double sigma_data) {
    if (!(sigma_data > 0.0)) throw std::invalid_argument("sigma_data must be positive");
    const double var = sigma_data * sigma_data;
    return DenoiserOracle(
        [var](const Vector& x, double sigma) -> Vector { return (var / (var + sigma * sigma)) * x; },
        "gaussian:" + format_double(sigma_data));
}

DenoiserOracle constant_denoiser(Vector x0) {
    return DenoiserOracle([x0 = std::move(x0)](const Vector&, double) -> Vector { return x0; }, "constant");
}

DenoiserOracle identity_denoiser() {
    return DenoiserOracle([](const Vector& x, double) -> Vector { return x; }, "identity");
}

GmmSpec::GmmSpec(std::vector<GmmComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("GMM needs at least one component");
    const auto dim = components_.front().mean.size();
    if (dim == 0) throw std::invalid_argument("GMM means must be non-empty");
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0)) throw std::invalid_argument("GMM weights must be positive");
        if (!(c.stddev > 0.0)) throw std::invalid_argument("GMM component std must be positive");
        if (c.mean.size() != dim) throw std::invalid_argument("GMM means differ in dimension");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("GMM weights must sum to 1 (got " + format_double(total) + ")");
    }
}

GmmSpec GmmSpec::parse(std::string_view text) {
    std::vector<GmmComponent> comps;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::vector<double> values;
        std::string tok;
        while (fields >> tok) {
            try {
                values.push_back(parse_double(tok));
            } catch (const std::invalid_argument&) {
                throw std::invalid_argument("GMM line " + std::to_string(lineno) + ": bad number '" + tok + "'");
            }
        }
        if (values.empty()) continue;
        if (values.size() < 3) {
            throw std::invalid_argument("GMM line " + std::to_string(lineno) + ": expected weight, mean..., std");
        }
        GmmComponent c;
        c.weight = values.front();
        c.stddev = values.back();
        c.mean = Eigen::Map<const Vector>(values.data() + 1, static_cast<Eigen::Index>(values.size() - 2));
        comps.push_back(std::move(c));
    }
    return GmmSpec(std::move(comps));
}

GmmSpec GmmSpec::load(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open GMM file '" + path + "'");
    std::stringstream buf;
    buf << file.rdbuf();
    return parse(buf.str());
}

Vector GmmSpec::mean() const {
    Vector m = Vector::Zero(dim());
    for (const auto& c : components_) m += c.weight * c.mean;
    return m;
}

DenoiserOracle gmm_denoiser(GmmSpec spec, std::string description) {
    const auto n = spec.components().size();
    std::vector<double> log_weights(n), var(n);
    std::vector<Vector> means(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& c = spec.components()[k];
        log_weights[k] = std::log(c.weight);
        var[k] = c.stddev * c.stddev;
        means[k] = c.mean;
    }
    const double dim = static_cast<double>(spec.dim());
    auto fn = [log_weights, var, means, dim](const Vector& x, double sigma) -> Vector {
        const double s2 = sigma * sigma;
        const std::size_t n = means.size();
        double logit_max = -std::numeric_limits<double>::infinity();
        // stack buffer covers the common small-mixture case
        double logits_small[16];
        std::vector<double> logits_big;
        double* logits = logits_small;
        if (n > 16) {
            logits_big.resize(n);
            logits = logits_big.data();
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double v = var[k] + s2;
            logits[k] = log_weights[k] - 0.5 * dim * std::log(v) - 0.5 * (x - means[k]).squaredNorm() / v;
            logit_max = std::max(logit_max, logits[k]);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            logits[k] = std::exp(logits[k] - logit_max);
            total += logits[k];
        }
        Vector out = Vector::Zero(x.size());
        for (std::size_t k = 0; k < n; ++k) {
            const double w = logits[k] / total;
            if (w == 0.0) continue;
            const double v = var[k] + s2;
            out += (w / v) * (var[k] * x + s2 * means[k]);
        }
        return out;
    };
    return DenoiserOracle(std::move(fn), std::move(description));
}

Vector sample_gmm(const GmmSpec& spec, RngStream& stream) {
    const double u = stream.next_uniform();
    const auto& comps = spec.components();
    std::size_t pick = comps.size() - 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        acc += comps[k].weight;
        if (u <= acc) {
            pick = k;
            break;
        }
    }
    Vector x(spec.dim());
    for (Eigen::Index d = 0; d < x.size(); ++d) x[d] = stream.next_gaussian();
    return comps[pick].mean + comps[pick].stddev * x;
}

Vector exact_gaussian_ode_endpoint(const Vector& x_start, double sigma_start, double sigma_end, double sigma_data) {
    if (!(sigma_data > 0.0)) throw std::invalid_argument("sigma_data must be positive");
    if (!(sigma_start >= sigma_end) || sigma_end < 0.0) {
        throw std::invalid_argument("exact endpoint needs sigma_start >= sigma_end >= 0");
    }
    const double v = sigma_data * sigma_data;
    return x_start * std::sqrt((v + sigma_end * sigma_end) / (v + sigma_start * sigma_start));
}

Vector forward_perturb(const Vector& x0, double sigma, const NoiseDraw& noise) {
    if (noise.eps.size() != x0.size()) throw std::invalid_argument("noise dimension does not match x0");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    return x0 + sigma * noise.eps;
}

Vector score_from_denoiser(const DenoiserOracle& oracle, const Vector& x, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("score needs sigma > 0");
    return (oracle(x, sigma) - x) / (sigma * sigma);
}

OracleConfig parse_oracle_flag(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("oracle must be gaussian:<sigma_data> or gmm:<path>");
    }
    const auto kind = text.substr(0, colon);
    const auto arg = text.substr(colon + 1);
    OracleConfig cfg;
    cfg.label = std::string(text);
    if (kind == "gaussian") {
        cfg.kind = OracleConfig::Kind::Gaussian;
        cfg.sigma_data = parse_double(arg);
        if (!(cfg.sigma_data > 0.0)) throw std::invalid_argument("gaussian oracle needs sigma_data > 0");
    } else if (kind == "gmm") {
        cfg.kind = OracleConfig::Kind::Gmm;
        cfg.gmm_path = std::string(arg);
        if (cfg.gmm_path.empty()) throw std::invalid_argument("gmm oracle needs a file path");
    } else {
        throw std::invalid_argument("unknown oracle kind '" + std::string(kind) + "'");
    }
    return cfg;
}

DenoiserOracle make_oracle(const OracleConfig& config) {
    if (config.kind == OracleConfig::Kind::Gaussian) return gaussian_denoiser(config.sigma_data);
    return gmm_denoiser(GmmSpec::load(config.gmm_path), config.label);
}

}  // namespace diffsched
