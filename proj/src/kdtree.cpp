#include "squeezefit/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "squeezefit/errors.hpp"

namespace sqz {

KdTree::KdTree(Eigen::MatrixXd points, Index leaf_size) : points_(std::move(points)), leaf_size_(std::max<Index>(1, leaf_size)) {
    order_.resize(static_cast<std::size_t>(points_.rows()));
    std::iota(order_.begin(), order_.end(), Index(0));
    if (points_.rows() > 0) {
        nodes_.reserve(static_cast<std::size_t>(2 * points_.rows() / leaf_size_ + 2));
        build(0, points_.rows());
    }
}

Index KdTree::build(Index begin, Index end) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    Index best_dim = 0;
    double best_spread = -1;
    for (Index k = 0; k < dim(); ++k) {
        double lo = points_(order_[static_cast<std::size_t>(begin)], k), hi = lo;
        for (Index i = begin; i < end; ++i) {
            const double v = points_(order_[static_cast<std::size_t>(i)], k);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = k;
        }
    }
    if (best_spread <= 0) return id;  // all points identical: keep as a leaf

    const Index mid = begin + (end - begin) / 2;
    auto first = order_.begin() + begin;
    std::nth_element(first, order_.begin() + mid, order_.begin() + end, [&](Index a, Index b) {
        return points_(a, best_dim) < points_(b, best_dim);
    });
    const double split = points_(order_[static_cast<std::size_t>(mid)], best_dim);

    nodes_[static_cast<std::size_t>(id)].split_dim = best_dim;
    nodes_[static_cast<std::size_t>(id)].split_value = split;
    const Index left = build(begin, mid);
    const Index right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

// heap is a max-heap on (squared distance, index) holding the k best so far.
void KdTree::knn_search(Index node_id, const Eigen::VectorXd& q, Index k,
                        std::vector<std::pair<double, Index>>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.split_dim < 0) {
        for (Index i = node.begin; i < node.end; ++i) {
            const Index idx = order_[static_cast<std::size_t>(i)];
            const std::pair<double, Index> cand{squared_distance(points_.row(idx), q), idx};
            if (static_cast<Index>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end());
            } else if (cand < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    // Left subtree holds values <= split, right subtree values >= split.
    const double diff = q(node.split_dim) - node.split_value;
    const Index near = diff <= 0 ? node.left : node.right;
    const Index far = diff <= 0 ? node.right : node.left;
    knn_search(near, q, k, heap);
    // Ties at equal distance must still be visited so the smaller index wins.
    if (static_cast<Index>(heap.size()) < k || diff * diff <= heap.front().first) knn_search(far, q, k, heap);
}

void KdTree::radius_search(Index node_id, const Eigen::VectorXd& q, double r2, std::vector<Neighbor>& out) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.split_dim < 0) {
        for (Index i = node.begin; i < node.end; ++i) {
            const Index idx = order_[static_cast<std::size_t>(i)];
            const double d2 = squared_distance(points_.row(idx), q);
            if (d2 <= r2) out.push_back(Neighbor{idx, std::sqrt(d2)});
        }
        return;
    }
    const double diff = q(node.split_dim) - node.split_value;
    const Index near = diff <= 0 ? node.left : node.right;
    const Index far = diff <= 0 ? node.right : node.left;
    radius_search(near, q, r2, out);
    if (diff * diff <= r2) radius_search(far, q, r2, out);
}

std::vector<Neighbor> KdTree::knn(const Eigen::Ref<const Eigen::VectorXd>& query, Index k) const {
    if (query.size() != dim()) throw InvalidInput("KdTree::knn: query dimension mismatch");
    std::vector<Neighbor> out;
    if (k <= 0 || size() == 0) return out;
    const Eigen::VectorXd q = query;
    std::vector<std::pair<double, Index>> heap;
    heap.reserve(static_cast<std::size_t>(std::min(k, size())));
    knn_search(0, q, k, heap);
    std::sort(heap.begin(), heap.end());
    out.reserve(heap.size());
    for (const auto& [d2, idx] : heap) out.push_back(Neighbor{idx, std::sqrt(d2)});
    return out;
}

std::vector<Neighbor> KdTree::within(const Eigen::Ref<const Eigen::VectorXd>& query, double radius) const {
    if (query.size() != dim()) throw InvalidInput("KdTree::within: query dimension mismatch");
    std::vector<Neighbor> out;
    if (size() == 0 || radius < 0) return out;
    const Eigen::VectorXd q = query;
    radius_search(0, q, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Neighbor> linear_knn(const Eigen::MatrixXd& points, const Eigen::Ref<const Eigen::VectorXd>& query, Index k) {
    std::vector<std::pair<double, Index>> all;
    all.reserve(static_cast<std::size_t>(points.rows()));
    for (Index i = 0; i < points.rows(); ++i) all.emplace_back(squared_distance(points.row(i), query), i);
    const auto keep = static_cast<std::size_t>(std::clamp<Index>(k, 0, points.rows()));
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end());
    std::vector<Neighbor> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back(Neighbor{all[i].second, std::sqrt(all[i].first)});
    return out;
}

} // namespace sqz
