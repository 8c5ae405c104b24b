#pragma once

// Hand-rolled generators for the property tests. Every generator takes an Rng
// so a failing case can be replayed from its seed.

#include <algorithm>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "squeezefit/dataset.hpp"
#include "squeezefit/random.hpp"
#include "squeezefit/spectral.hpp"

namespace sqz::testing {

inline Index uniform_index(Rng& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline MatrixXd random_symmetric(Index d, Rng& rng, double scale = 1.0) {
    const MatrixXd g = gaussian_matrix(d, d, rng) * scale;
    return (g + g.transpose()) / 2;
}

/// Random point of the spectahedron {0 <= M <= I}.
inline MatrixXd random_feasible(Index d, Rng& rng) {
    const MatrixXd q = random_orthogonal(d, rng);
    VectorXd values(d);
    for (Index i = 0; i < d; ++i) values(i) = uniform_real(rng, 0, 1);
    return reassemble(q, values);
}

/// Random orthogonal projection of the given rank.
inline MatrixXd random_projection(Index d, Index rank, Rng& rng) {
    const MatrixXd q = random_orthogonal(d, rng).leftCols(rank);
    const MatrixXd p = q * q.transpose();
    return (p + p.transpose()) / 2;
}

/// Gaussian points with labels drawn uniformly from {0..k-1}, every class
/// present at least once.
inline LabeledDataset random_dataset(Index n, Index d, int k, Rng& rng) {
    const MatrixXd x = gaussian_matrix(n, d, rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % k);
    std::shuffle(labels.begin(), labels.end(), rng);
    return LabeledDataset(x, labels);
}

/// Points on a small integer grid, so exact distance ties are common.
inline LabeledDataset random_grid_dataset(Index n, Index d, int k, Rng& rng) {
    MatrixXd x(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) x(i, j) = static_cast<double>(uniform_index(rng, -3, 3));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(uniform_index(rng, 0, k - 1));
    labels[0] = 0;
    if (n > 1) labels[1] = 1;
    return LabeledDataset(x, labels);
}

/// The smallest cross-class Euclidean distance, by brute force.
inline double min_cross_distance(const LabeledDataset& ds) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ds.size(); ++i)
        for (Index j = i + 1; j < ds.size(); ++j)
            if (ds.label(i) != ds.label(j)) best = std::min(best, (ds.point(i) - ds.point(j)).norm());
    return best;
}

/// The instances shared by the squeeze-once and contact-length checks:
/// alternating labels, d in [2,5], n in [6,20], Δ = 0.8 · min cross-class distance.
struct SqueezeInstance {
    LabeledDataset data;
    double delta = 0;
};

inline SqueezeInstance squeeze_instance(std::uint64_t seed) {
    Rng rng(seed);
    const Index d = uniform_index(rng, 2, 5);
    const Index n = uniform_index(rng, 6, 20);
    const MatrixXd x = gaussian_matrix(n, d, rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    SqueezeInstance out{LabeledDataset(x, labels), 0};
    out.delta = 0.8 * min_cross_distance(out.data);
    return out;
}

} // namespace sqz::testing
