#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace diffsched {

/// Raised when a fractional node would interpolate toward a zero level.
class DegenerateInterpolation : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Strictly decreasing ladder of noise levels sigma_0 > ... > sigma_N >= 0.
/// Only the final level may be zero.
class NoiseSchedule {
  public:
    explicit NoiseSchedule(std::vector<double> sigmas);

    std::span<const double> sigmas() const noexcept { return sigmas_; }
    double operator[](std::size_t i) const { return sigmas_[i]; }
    std::size_t size() const noexcept { return sigmas_.size(); }
    /// Number of transitions (size() - 1).
    std::size_t steps() const noexcept { return sigmas_.size() - 1; }
    bool terminal_zero() const noexcept { return sigmas_.back() == 0.0; }
    double sigma_max() const noexcept { return sigmas_.front(); }
    /// Smallest non-zero level.
    double sigma_min() const noexcept;

    friend bool operator==(const NoiseSchedule&, const NoiseSchedule&) = default;

  private:
    std::vector<double> sigmas_;
};

/// Fractional node i + k between integer nodes i and i + 1, k in (0, 1].
struct FractionalNode {
    std::int64_t base = 0;
    double frac = 1.0;

    FractionalNode(std::int64_t base, double frac);
};

/// rho-power levels between sigma_max and sigma_min (both endpoints exact),
/// optionally followed by a terminal zero.
NoiseSchedule karras_schedule(int n_steps, double sigma_min, double sigma_max, double rho, bool append_zero);

/// Same rule, returned as raw levels; n_steps = 1 yields {sigma_max}.
std::vector<double> karras_levels(int n_steps, double sigma_min, double sigma_max, double rho);

enum class ScheduleMode { Regenerate, Slice };

std::string_view schedule_mode_name(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view text);

/// Splits `parent` into consecutive segments of the given step counts.
/// Segment k spans parent levels [offset_k, offset_k + steps_k]; adjacent
/// segments share their boundary level.
std::vector<NoiseSchedule> sub_schedule(const NoiseSchedule& parent, std::span<const int> segment_steps,
                                        ScheduleMode mode, double rho);

/// Log-linear interpolation sigma_i^(1-k) * sigma_next^k; k = 1/2 is the geometric mean.
double sigma_interpolate(double sigma_i, double sigma_next, double k);

double sigma_at(const FractionalNode& node, double sigma_i, double sigma_next);

/// Comma-separated levels at shortest round-trip precision.
std::string to_csv_row(const NoiseSchedule& schedule);
NoiseSchedule schedule_from_csv_row(std::string_view row);

}  // namespace diffsched
