#include "diffsched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diffsched/rng.hpp"

namespace diffsched {

SampleBatch SampleBatch::from_rows(std::span<const Vector> rows) {
    SampleBatch batch;
    if (rows.empty()) return batch;
    const auto dim = rows.front().size();
    batch.samples.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != dim) throw std::invalid_argument("batch rows differ in dimension");
        batch.samples.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    }
    return batch;
}

double w2_gaussian(const Vector& mean_a, double std_a, const Vector& mean_b, double std_b) {
    if (!(std_a > 0.0) || !(std_b > 0.0)) throw std::invalid_argument("Gaussian std must be positive");
    if (mean_a.size() != mean_b.size()) throw std::invalid_argument("Gaussian means differ in dimension");
    const double ds = std_a - std_b;
    return std::sqrt((mean_a - mean_b).squaredNorm() + static_cast<double>(mean_a.size()) * ds * ds);
}

double wasserstein2_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || a.size() != b.size()) throw std::invalid_argument("1-D W2 needs equal, non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

double sliced_w2(const SampleBatch& a, const SampleBatch& b, int n_projections, std::uint64_t seed) {
    if (a.count() == 0 || b.count() == 0) throw std::invalid_argument("sliced W2 needs non-empty batches");
    if (a.dim() != b.dim()) throw std::invalid_argument("sliced W2 batches differ in dimension");
    if (n_projections < 1) throw std::invalid_argument("sliced W2 needs at least one projection");
    const Eigen::Index n = std::min(a.count(), b.count());
    const Eigen::Index dim = a.dim();

    double total = 0.0;
    std::vector<double> pa(static_cast<std::size_t>(n)), pb(static_cast<std::size_t>(n));
    for (int p = 0; p < n_projections; ++p) {
        auto stream = derive_stream(seed, StreamPurpose::MetricProjection, static_cast<std::uint64_t>(p));
        Vector dir(dim);
        do {
            for (Eigen::Index d = 0; d < dim; ++d) dir[d] = stream.next_gaussian();
        } while (dir.squaredNorm() == 0.0);
        dir.normalize();
        for (Eigen::Index r = 0; r < n; ++r) {
            pa[static_cast<std::size_t>(r)] = a.samples.row(r).dot(dir);
            pb[static_cast<std::size_t>(r)] = b.samples.row(r).dot(dir);
        }
        total += wasserstein2_1d(pa, pb);
    }
    return total / static_cast<double>(n_projections);
}

double fit_convergence_order(std::span<const int> step_counts, std::span<const double> errors) {
    if (step_counts.size() != errors.size()) throw std::invalid_argument("step counts and errors differ in length");
    if (step_counts.size() < 3) throw std::invalid_argument("convergence fit needs at least three points");
    const auto n = static_cast<double>(step_counts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0)) throw std::invalid_argument("convergence fit needs positive errors");
        if (step_counts[i] < 1) throw std::invalid_argument("convergence fit needs positive step counts");
        const double x = -std::log(static_cast<double>(step_counts[i]));
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("convergence fit needs distinct step counts");
    return (n * sxy - sx * sy) / denom;
}

BatchMoments batch_moments(const SampleBatch& batch) {
    if (batch.count() < 2) throw std::invalid_argument("batch moments need at least two samples");
    BatchMoments m;
    m.mean = batch.samples.colwise().mean().transpose();
    const Eigen::MatrixXd centered = batch.samples.rowwise() - m.mean.transpose();
    m.stddev = (centered.colwise().squaredNorm() / static_cast<double>(batch.count() - 1)).cwiseSqrt().transpose();
    return m;
}

}  // namespace diffsched
