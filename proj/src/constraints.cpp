#include "squeezefit/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "squeezefit/errors.hpp"
#include "squeezefit/kdtree.hpp"
#include "squeezefit/spectral.hpp"

namespace sqz {

MatrixXd ConstraintSet::matrix() const {
    MatrixXd out(size(), dim);
    for (Index r = 0; r < size(); ++r) out.row(r) = pairs[static_cast<std::size_t>(r)].z.transpose();
    return out;
}

ConstraintSet constraints_from_vectors(const MatrixXd& rows) {
    ConstraintSet out;
    out.dim = rows.cols();
    out.pairs.reserve(static_cast<std::size_t>(rows.rows()));
    for (Index r = 0; r < rows.rows(); ++r) out.pairs.push_back(DifferencePair{r, r, rows.row(r).transpose()});
    return out;
}

namespace {

void require_two_classes(const LabeledDataset& ds, const char* what) {
    if (ds.num_classes() < 2) throw InvalidInput(std::string(what) + ": need at least two distinct labels");
}

DifferencePair make_pair(const LabeledDataset& ds, Index a, Index b) {
    const Index i = std::min(a, b), j = std::max(a, b);
    return DifferencePair{i, j, (ds.point(i) - ds.point(j)).transpose()};
}

} // namespace

ConstraintSet build_constraints_full(const LabeledDataset& ds) {
    require_two_classes(ds, "build_constraints_full");
    ConstraintSet out;
    out.dim = ds.dim();
    for (Index i = 0; i < ds.size(); ++i) {
        for (Index j = i + 1; j < ds.size(); ++j) {
            if (ds.label(i) == ds.label(j)) continue;
            auto p = make_pair(ds, i, j);
            if (p.z.squaredNorm() == 0)
                throw DegenerateData("points " + std::to_string(i) + " and " + std::to_string(j) +
                                     " coincide but carry different labels");
            out.pairs.push_back(std::move(p));
        }
    }
    return out;
}

ConstraintSet build_constraints_nn(const LabeledDataset& ds, Index s) {
    if (s < 1) throw InvalidInput("build_constraints_nn: s must be >= 1");
    require_two_classes(ds, "build_constraints_nn");

    const auto classes = ds.classes();
    std::vector<std::vector<Index>> members;
    std::vector<KdTree> trees;
    for (int label : classes) {
        members.push_back(ds.indices_of(label));
        trees.emplace_back(ds.points()(members.back(), Eigen::all));
    }

    std::set<std::pair<Index, Index>> chosen;
    for (Index i = 0; i < ds.size(); ++i) {
        const VectorXd q = ds.point(i).transpose();
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (classes[c] == ds.label(i)) continue;
            for (const auto& nb : trees[c].knn(q, s)) {
                const Index j = members[c][static_cast<std::size_t>(nb.index)];
                chosen.emplace(std::min(i, j), std::max(i, j));
            }
        }
    }

    ConstraintSet out;
    out.dim = ds.dim();
    out.nn_s = s;
    out.pairs.reserve(chosen.size());
    for (const auto& [i, j] : chosen) {
        auto p = make_pair(ds, i, j);
        if (p.z.squaredNorm() == 0)
            throw DegenerateData("points " + std::to_string(i) + " and " + std::to_string(j) +
                                 " coincide but carry different labels");
        out.pairs.push_back(std::move(p));
    }
    return out;
}

namespace {

MatrixXd transform_points(const LabeledDataset& ds, const MatrixXd& m) {
    if (m.rows() != ds.dim() || m.cols() != ds.dim())
        throw InvalidInput("cross_class_shortest: metric has wrong dimension");
    const MatrixXd root = psd_sqrt(m);
    return ds.points() * root;  // rows are (M^{1/2} x_i)^T since the root is symmetric
}

// Accumulates candidate pairs while tracking the running minimum squared length.
struct PairCollector {
    double rel_tol;
    double best2 = std::numeric_limits<double>::infinity();
    std::vector<std::tuple<double, Index, Index>> cands{};

    void add(double d2, Index a, Index b) {
        best2 = std::min(best2, d2);
        cands.emplace_back(d2, std::min(a, b), std::max(a, b));
    }

    ShortestPairs finish() {
        ShortestPairs out;
        if (cands.empty()) return out;
        out.min_length = std::sqrt(best2);
        const double cutoff = out.min_length * (1 + rel_tol);
        for (const auto& [d2, a, b] : cands)
            if (std::sqrt(d2) <= cutoff) out.pairs.emplace_back(a, b);
        std::sort(out.pairs.begin(), out.pairs.end());
        out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end()), out.pairs.end());
        return out;
    }
};

} // namespace

ShortestPairs cross_class_shortest_scan(const LabeledDataset& ds, const MatrixXd& m, double rel_tol) {
    const MatrixXd pts = transform_points(ds, m);
    PairCollector col{rel_tol};
    for (Index i = 0; i < ds.size(); ++i)
        for (Index j = i + 1; j < ds.size(); ++j)
            if (ds.label(i) != ds.label(j)) col.add(squared_distance(pts.row(i), pts.row(j)), i, j);
    return col.finish();
}

ShortestPairs cross_class_shortest(const LabeledDataset& ds, const MatrixXd& m, double rel_tol) {
    if (ds.size() <= 256) return cross_class_shortest_scan(ds, m, rel_tol);

    const MatrixXd pts = transform_points(ds, m);
    const auto classes = ds.classes();
    std::vector<std::vector<Index>> members;
    for (int label : classes) members.push_back(ds.indices_of(label));

    // Pass 1: global minimum via one nearest-neighbor query per (query point, other class).
    std::vector<KdTree> trees;
    for (const auto& mem : members) trees.emplace_back(pts(mem, Eigen::all));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < classes.size(); ++s)
        for (std::size_t t = s + 1; t < classes.size(); ++t)
            for (Index qi : members[s]) {
                const auto nb = trees[t].knn(pts.row(qi).transpose(), 1);
                if (!nb.empty()) best = std::min(best, nb.front().distance);
            }

    // Pass 2: every pair within the tolerance band.
    PairCollector col{rel_tol};
    const double radius = best * (1 + rel_tol);
    for (std::size_t s = 0; s < classes.size(); ++s)
        for (std::size_t t = s + 1; t < classes.size(); ++t)
            for (Index qi : members[s])
                for (const auto& nb : trees[t].within(pts.row(qi).transpose(), radius)) {
                    const Index j = members[t][static_cast<std::size_t>(nb.index)];
                    col.add(squared_distance(pts.row(std::min(qi, j)), pts.row(std::max(qi, j))), qi, j);
                }
    return col.finish();
}

} // namespace sqz
