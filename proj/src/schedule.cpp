#include "diffsched/schedule.hpp"

#include <cmath>
#include <numeric>

#include "diffsched/format.hpp"

namespace diffsched {

NoiseSchedule::NoiseSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
    if (sigmas_.size() < 2) {
        throw std::invalid_argument("noise schedule needs at least two levels");
    }
    for (std::size_t i = 0; i < sigmas_.size(); ++i) {
        const double s = sigmas_[i];
        if (!std::isfinite(s) || s < 0.0) {
            throw std::invalid_argument("noise levels must be finite and non-negative");
        }
        if (s == 0.0 && i + 1 != sigmas_.size()) {
            throw std::invalid_argument("only the final noise level may be zero");
        }
        if (i > 0 && !(sigmas_[i - 1] > s)) {
            throw std::invalid_argument("noise levels must be strictly decreasing");
        }
    }
}

double NoiseSchedule::sigma_min() const noexcept {
    return terminal_zero() ? sigmas_[sigmas_.size() - 2] : sigmas_.back();
}

FractionalNode::FractionalNode(std::int64_t base_, double frac_) : base(base_), frac(frac_) {
    if (!(frac > 0.0 && frac <= 1.0)) {
        throw std::invalid_argument("fractional node offset must lie in (0, 1]");
    }
}

std::vector<double> karras_levels(int n_steps, double sigma_min, double sigma_max, double rho) {
    if (n_steps < 1) throw std::invalid_argument("karras schedule needs n_steps >= 1");
    if (!(sigma_min > 0.0) || !(sigma_max > 0.0)) throw std::invalid_argument("sigma bounds must be positive");
    if (!(sigma_min < sigma_max)) throw std::invalid_argument("sigma_min must be below sigma_max");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");

    std::vector<double> levels(static_cast<std::size_t>(n_steps));
    levels.front() = sigma_max;
    if (n_steps == 1) return levels;

    const double inv_rho = 1.0 / rho;
    const double root_max = std::pow(sigma_max, inv_rho);
    const double root_min = std::pow(sigma_min, inv_rho);
    for (int i = 1; i + 1 < n_steps; ++i) {
        const double ramp = static_cast<double>(i) / static_cast<double>(n_steps - 1);
        levels[static_cast<std::size_t>(i)] = std::pow(root_max + ramp * (root_min - root_max), rho);
    }
    levels.back() = sigma_min;
    return levels;
}

NoiseSchedule karras_schedule(int n_steps, double sigma_min, double sigma_max, double rho, bool append_zero) {
    auto levels = karras_levels(n_steps, sigma_min, sigma_max, rho);
    if (append_zero) levels.push_back(0.0);
    return NoiseSchedule(std::move(levels));
}

std::string_view schedule_mode_name(ScheduleMode mode) {
    return mode == ScheduleMode::Regenerate ? "regenerate" : "slice";
}

ScheduleMode parse_schedule_mode(std::string_view text) {
    if (text == "regenerate") return ScheduleMode::Regenerate;
    if (text == "slice") return ScheduleMode::Slice;
    throw std::invalid_argument("unknown schedule mode '" + std::string(text) + "' (regenerate|slice)");
}

std::vector<NoiseSchedule> sub_schedule(const NoiseSchedule& parent, std::span<const int> segment_steps,
                                        ScheduleMode mode, double rho) {
    if (segment_steps.empty()) throw std::invalid_argument("no segments given");
    std::size_t total = 0;
    for (int s : segment_steps) {
        if (s < 1) throw std::invalid_argument("segment step counts must be positive");
        total += static_cast<std::size_t>(s);
    }
    if (total != parent.steps()) {
        throw std::invalid_argument("segment steps sum to " + std::to_string(total) + " but parent has " +
                                    std::to_string(parent.steps()) + " steps");
    }

    const auto sig = parent.sigmas();
    std::vector<NoiseSchedule> out;
    out.reserve(segment_steps.size());
    std::size_t offset = 0;
    for (int steps : segment_steps) {
        const std::size_t first = offset;
        const std::size_t last = offset + static_cast<std::size_t>(steps);
        if (mode == ScheduleMode::Slice) {
            out.emplace_back(std::vector<double>(sig.begin() + first, sig.begin() + last + 1));
        } else if (sig[last] == 0.0) {
            // rebuild down to the last non-zero level, then re-attach the zero
            if (steps == 1) {
                out.emplace_back(std::vector<double>{sig[first], 0.0});
            } else {
                out.push_back(karras_schedule(steps, sig[last - 1], sig[first], rho, true));
            }
        } else {
            out.push_back(karras_schedule(steps + 1, sig[last], sig[first], rho, false));
        }
        offset = last;
    }
    return out;
}

double sigma_interpolate(double sigma_i, double sigma_next, double k) {
    if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("interpolation fraction must lie in (0, 1]");
    if (!(sigma_i > 0.0) || sigma_next < 0.0 || !(sigma_i > sigma_next)) {
        throw std::invalid_argument("interpolation needs sigma_i > sigma_next >= 0");
    }
    if (k == 1.0) return sigma_next;
    if (sigma_next == 0.0) {
        throw DegenerateInterpolation("cannot interpolate log-linearly toward a zero noise level");
    }
    if (k == 0.5) return std::sqrt(sigma_i * sigma_next);
    return std::pow(sigma_i, 1.0 - k) * std::pow(sigma_next, k);
}

double sigma_at(const FractionalNode& node, double sigma_i, double sigma_next) {
    return sigma_interpolate(sigma_i, sigma_next, node.frac);
}

std::string to_csv_row(const NoiseSchedule& schedule) {
    std::string row;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (i) row += ',';
        row += format_double(schedule[i]);
    }
    return row;
}

NoiseSchedule schedule_from_csv_row(std::string_view row) {
    std::vector<double> levels;
    std::size_t start = 0;
    while (start <= row.size()) {
        const auto comma = row.find(',', start);
        const auto end = comma == std::string_view::npos ? row.size() : comma;
        levels.push_back(parse_double(row.substr(start, end - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return NoiseSchedule(std::move(levels));
}

}  // namespace diffsched
