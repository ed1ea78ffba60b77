#include "diffsched/verify/reference_rows.hpp"

#include <cmath>
#include <stdexcept>

namespace diffsched::verify {

namespace {

bool has_history(const RowInputs& in) { return in.prev_denoised.size() > 0; }

}  // namespace

Vector euler_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    return (t / s) * in.x + (1.0 - t / s) * D(in.x, s);
}

Vector heun_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const Vector d = (in.x - D(in.x, s)) / s;
    const Vector x2 = in.x + d * (t - s);
    const Vector d2 = (x2 - D(x2, t)) / t;
    return in.x + 0.5 * (d + d2) * (t - s);
}

Vector dpm2_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const double mid = std::exp(0.5 * (std::log(s) + std::log(t)));
    const Vector d = (in.x - D(in.x, s)) / s;
    const Vector x2 = in.x + d * (mid - s);
    const Vector d2 = (x2 - D(x2, mid)) / mid;
    return in.x + d2 * (t - s);
}

Vector dpmpp2m_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const Vector denoised = D(in.x, s);
    const double t_cur = -std::log(s), t_next = -std::log(t);
    const double h = t_next - t_cur;
    Vector used = denoised;
    if (has_history(in)) {
        const double h_last = t_cur + std::log(in.sigma_prev);
        const double r = h_last / h;
        used = (1.0 + 1.0 / (2.0 * r)) * denoised - (1.0 / (2.0 * r)) * in.prev_denoised;
    }
    return (t / s) * in.x - std::expm1(-h) * used;
}

Vector euler_a_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const double up = std::min(t, std::sqrt(t * t * (s * s - t * t) / (s * s)));
    const double down = std::sqrt(t * t - up * up);
    const Vector d = (in.x - D(in.x, s)) / s;
    return in.x + d * (down - s) + up * in.eps;
}

Vector dpmpp_sde_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const double q = (t * t) / (s * s);
    const Vector di = D(in.x, s);
    const Vector x_hat = (t / s) * in.x + (1.0 - t / s) * di;
    const Vector dh = D(x_hat, t);
    return q * in.x + (1.0 - q) * di + 0.5 * (1.0 - q) * (dh - di) + (t / s) * std::sqrt(s * s - t * t) * in.eps;
}

Vector dpmpp_2s_a_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const double q = (t * t) / (s * s);
    const Vector di = D(in.x, s);
    const Vector x_hat = (t / s) * in.x + (1.0 - t / s) * di;
    return q * in.x + (1.0 - q) * D(x_hat, t) + (t / s) * std::sqrt(s * s - t * t) * in.eps;
}

Vector dpmpp_2m_sde_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const Vector denoised = D(in.x, s);
    const double h = std::log(s) - std::log(t);
    const double decay = -std::expm1(-2.0 * h);
    Vector x = (t / s) * std::exp(-h) * in.x + decay * denoised;
    if (has_history(in)) {
        const double h_last = std::log(in.sigma_prev) - std::log(s);
        const double r = h_last / h;
        x += 0.5 * decay * (1.0 / r) * (denoised - in.prev_denoised);
    }
    return x + t * std::sqrt(decay) * in.eps;
}

Vector dpm2_a_literal_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const double q = (t * t) / (s * s);
    const Vector di = D(in.x, s);
    const double half = std::sqrt(s * t);
    const Vector x_half = (half / s) * in.x + (1.0 - half / s) * di;
    const double k = (s * s - t * t) / (s * t * t);
    return q * in.x + (1.0 - q) * di + k * (D(x_half, half) - di) + (t / s) * std::sqrt(s * s - t * t) * in.eps;
}

Vector dpm2_a_ancestral_row(const RowInputs& in, const DenoiserOracle& D) {
    const double s = in.sigma, t = in.sigma_next;
    const double up = std::min(t, std::sqrt(t * t * (s * s - t * t) / (s * s)));
    const double down = std::sqrt(t * t - up * up);
    const double mid = std::exp(0.5 * (std::log(s) + std::log(down)));
    const Vector d = (in.x - D(in.x, s)) / s;
    const Vector x2 = in.x + d * (mid - s);
    const Vector d2 = (x2 - D(x2, mid)) / mid;
    return in.x + d2 * (down - s) + up * in.eps;
}

Vector reference_row(SamplerKind kind, const RowInputs& in, const DenoiserOracle& D, Dpm2aVariant variant) {
    switch (kind) {
        case SamplerKind::Euler: return euler_row(in, D);
        case SamplerKind::Heun: return heun_row(in, D);
        case SamplerKind::Dpm2: return dpm2_row(in, D);
        case SamplerKind::DpmPP2M: return dpmpp2m_row(in, D);
        case SamplerKind::EulerA: return euler_a_row(in, D);
        case SamplerKind::DpmPPSDE: return dpmpp_sde_row(in, D);
        case SamplerKind::DpmPP2SA: return dpmpp_2s_a_row(in, D);
        case SamplerKind::DpmPP2MSDE: return dpmpp_2m_sde_row(in, D);
        case SamplerKind::Dpm2A:
            return variant == Dpm2aVariant::Literal ? dpm2_a_literal_row(in, D) : dpm2_a_ancestral_row(in, D);
    }
    throw std::invalid_argument("unknown sampler kind");
}

}  // namespace diffsched::verify
