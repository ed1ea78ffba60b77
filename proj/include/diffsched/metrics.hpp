#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "diffsched/vector.hpp"

namespace diffsched {

/// Samples stored row-wise (one sample per row).
struct SampleBatch {
    Eigen::MatrixXd samples;
    /// First and one-past-last seed of the trajectories that produced the rows.
    std::pair<std::uint64_t, std::uint64_t> seed_range{0, 0};

    static SampleBatch from_rows(std::span<const Vector> rows);
    Eigen::Index count() const noexcept { return samples.rows(); }
    Eigen::Index dim() const noexcept { return samples.cols(); }
};

/// W2 between isotropic Gaussians N(mean_a, std_a^2 I) and N(mean_b, std_b^2 I).
double w2_gaussian(const Vector& mean_a, double std_a, const Vector& mean_b, double std_b);

/// Mean over seeded random unit directions of the exact 1-D W2 between the
/// projected batches (sorted pairing). Batches are truncated to the smaller count.
double sliced_w2(const SampleBatch& a, const SampleBatch& b, int n_projections, std::uint64_t seed);

/// Exact 1-D W2 between two equal-size samples.
double wasserstein2_1d(std::vector<double> a, std::vector<double> b);

/// Least-squares slope of log(error) against log(1 / N).
double fit_convergence_order(std::span<const int> step_counts, std::span<const double> errors);

struct BatchMoments {
    Vector mean;
    Vector stddev;  // unbiased, per coordinate
};

BatchMoments batch_moments(const SampleBatch& batch);

}  // namespace diffsched
