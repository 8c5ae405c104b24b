#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "squeezefit/dataset.hpp"

namespace sqz {

/// z = x_i - x_j for a cross-class pair, stored once per unordered pair with i < j.
struct DifferencePair {
    Index i = 0;
    Index j = 0;
    VectorXd z;
};

/// Difference vectors that define the separation constraints z^T M z >= Δ².
/// `nn_s` is empty for the full set Z(D) and holds s for the nearest-neighbor
/// pruned set Z_s(D).
struct ConstraintSet {
    std::vector<DifferencePair> pairs;
    std::optional<Index> nn_s;
    Index dim = 0;

    Index size() const noexcept { return static_cast<Index>(pairs.size()); }
    bool empty() const noexcept { return pairs.empty(); }
    /// Rows are the z vectors.
    MatrixXd matrix() const;
};

/// Build a constraint set directly from difference vectors (no pair provenance).
ConstraintSet constraints_from_vectors(const MatrixXd& rows);

ConstraintSet build_constraints_full(const LabeledDataset& ds);
ConstraintSet build_constraints_nn(const LabeledDataset& ds, Index s);

struct ShortestPairs {
    double min_length = 0;
    std::vector<std::pair<Index, Index>> pairs;  // (i, j) with i < j
};

/// Exact minimum of ||M^{1/2}(x_i - x_j)|| over cross-class pairs together with
/// every pair within relative tolerance `rel_tol` of it. Uses a k-d tree per
/// class pair in the transformed space once n exceeds 256.
ShortestPairs cross_class_shortest(const LabeledDataset& ds, const MatrixXd& m, double rel_tol = 1e-9);

/// The same search by exhaustive scan over transformed points.
ShortestPairs cross_class_shortest_scan(const LabeledDataset& ds, const MatrixXd& m, double rel_tol = 1e-9);

} // namespace sqz
