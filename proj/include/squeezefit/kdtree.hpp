#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sqz {

using Eigen::Index;

struct Neighbor {
    Index index = 0;
    double distance = 0;  // Euclidean

    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    }
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Squared Euclidean distance accumulated coordinate by coordinate, the one
/// formula used by the tree and by every linear scan so results agree bit for bit.
template <typename A, typename B>
double squared_distance(const A& a, const B& b) {
    double acc = 0;
    for (Index k = 0; k < a.size(); ++k) {
        const double diff = a(k) - b(k);
        acc += diff * diff;
    }
    return acc;
}

/// Exact nearest-neighbor search over the rows of a point matrix. Splits are
/// median splits on the widest coordinate. Results are ordered by (distance,
/// index), so ties resolve toward the smaller reference index.
class KdTree {
public:
    explicit KdTree(Eigen::MatrixXd points, Index leaf_size = 8);

    Index size() const noexcept { return points_.rows(); }
    Index dim() const noexcept { return points_.cols(); }
    const Eigen::MatrixXd& points() const noexcept { return points_; }

    std::vector<Neighbor> knn(const Eigen::Ref<const Eigen::VectorXd>& query, Index k) const;
    /// All points with distance <= radius, sorted.
    std::vector<Neighbor> within(const Eigen::Ref<const Eigen::VectorXd>& query, double radius) const;

private:
    struct Node {
        Index begin = 0, end = 0;  // range in order_
        Index split_dim = -1;       // -1 marks a leaf
        double split_value = 0;
        Index left = -1, right = -1;
    };

    Index build(Index begin, Index end);
    void knn_search(Index node, const Eigen::VectorXd& q, Index k, std::vector<std::pair<double, Index>>& heap) const;
    void radius_search(Index node, const Eigen::VectorXd& q, double r2, std::vector<Neighbor>& out) const;

    Eigen::MatrixXd points_;
    Index leaf_size_;
    std::vector<Index> order_;
    std::vector<Node> nodes_;
};

/// Brute-force k nearest rows, same ordering rules as KdTree.
std::vector<Neighbor> linear_knn(const Eigen::MatrixXd& points, const Eigen::Ref<const Eigen::VectorXd>& query, Index k);

} // namespace sqz
