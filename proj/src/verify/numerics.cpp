#include "diffsched/verify/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace diffsched::verify {

double gmm_tweedie_quadrature_1d(const GmmSpec& spec, double x, double sigma, int intervals_per_component) {
    if (spec.dim() != 1) throw std::invalid_argument("quadrature oracle is 1-D only");
    const double inv_norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto normal_pdf = [inv_norm](double v, double mean, double sd) {
        const double z = (v - mean) / sd;
        return inv_norm / sd * std::exp(-0.5 * z * z);
    };
    double numerator = 0.0;
    double denominator = 0.0;
    for (const auto& c : spec.components()) {
        const double mu = c.mean[0];
        const double lo = std::min(mu - 12.0 * c.stddev, x - 12.0 * sigma);
        const double hi = std::max(mu + 12.0 * c.stddev, x + 12.0 * sigma);
        const double finest = (hi - lo) / (std::min(c.stddev, sigma) / 200.0);
        int intervals = std::max(intervals_per_component, static_cast<int>(std::ceil(finest)));
        if (intervals % 2) ++intervals;
        const double h = (hi - lo) / intervals;
        double num = 0.0, den = 0.0;
        for (int j = 0; j <= intervals; ++j) {
            const double x0 = lo + j * h;
            const double wgt = (j == 0 || j == intervals) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            const double f = c.weight * normal_pdf(x0, mu, c.stddev) * normal_pdf(x, x0, sigma);
            num += wgt * x0 * f;
            den += wgt * f;
        }
        numerator += num * h / 3.0;
        denominator += den * h / 3.0;
    }
    return numerator / denominator;
}

double gmm_perturbed_log_density(const GmmSpec& spec, const Vector& x, double sigma) {
    const double dim = static_cast<double>(x.size());
    std::vector<double> terms;
    terms.reserve(spec.components().size());
    for (const auto& c : spec.components()) {
        const double var = c.stddev * c.stddev + sigma * sigma;
        terms.push_back(std::log(c.weight) - 0.5 * dim * std::log(2.0 * std::numbers::pi * var) -
                        0.5 * (x - c.mean).squaredNorm() / var);
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - top);
    return top + std::log(acc);
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
    Vector g(x.size());
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        auto shifted = [&](double delta) {
            Vector y = x;
            y[d] += delta;
            return f(y);
        };
        g[d] = (-shifted(2 * h) + 8 * shifted(h) - 8 * shifted(-h) + shifted(-2 * h)) / (12 * h);
    }
    return g;
}

Vector fine_grid_euler(const DenoiserOracle& denoiser, const Vector& x, double sigma_start, double sigma_end,
                       int steps) {
    if (steps < 1 || !(sigma_start > sigma_end)) throw std::invalid_argument("fine grid needs a decreasing interval");
    Vector cur = x;
    const double h = (sigma_end - sigma_start) / steps;
    for (int j = 0; j < steps; ++j) {
        const double s = sigma_start + j * h;
        cur += h * (cur - denoiser(cur, s)) / s;
    }
    return cur;
}

GmmSpec two_mode_gmm() {
    Vector a(2), b(2);
    a << -2.0, 0.0;
    b << 2.0, 0.0;
    return GmmSpec({GmmComponent{0.5, a, 0.5}, GmmComponent{0.5, b, 0.5}});
}

}  // namespace diffsched::verify
