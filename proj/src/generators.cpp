#include "squeezefit/generators.hpp"

#include <cmath>
#include <limits>

#include "squeezefit/errors.hpp"
#include "squeezefit/random.hpp"

namespace sqz {

LabeledDataset generate_simplex_base(Index r, Index d) {
    if (r < 1 || r >= d) throw InvalidInput("generate_simplex_base: need 1 <= r < d");
    MatrixXd pts = MatrixXd::Zero(r + 1, d);
    std::vector<int> labels(static_cast<std::size_t>(r + 1), 0);
    for (Index i = 0; i < r; ++i) pts(i, i) = 1.0;
    labels.back() = 1;
    return LabeledDataset(std::move(pts), std::move(labels));
}

LabeledDataset generate_cube_base(Index r) {
    if (r < 1 || r > 20) throw InvalidInput("generate_cube_base: need 1 <= r <= 20");
    const Index n = Index(1) << r;
    MatrixXd pts(n, r);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index v = 0; v < n; ++v) {
        int parity = 0;
        for (Index k = 0; k < r; ++k) {
            const int bit = static_cast<int>((v >> k) & 1);
            pts(v, k) = bit;
            parity ^= bit;
        }
        labels[static_cast<std::size_t>(v)] = parity;
    }
    return LabeledDataset(std::move(pts), std::move(labels));
}

void PlantedModel::validate() const {
    if (!(r >= 1 && r < d)) throw InvalidInput("PlantedModel: need 1 <= r < d");
    if (a < 2) throw InvalidInput("PlantedModel: need a >= 2");
    if (b < 1) throw InvalidInput("PlantedModel: need b >= 1");
    if (!(sigma >= 0)) throw InvalidInput("PlantedModel: need sigma >= 0");
    if (!(delta > 0)) throw InvalidInput("PlantedModel: need delta > 0");
    switch (base) {
    case BaseKind::simplex:
        if (a != r + 1) throw InvalidInput("PlantedModel: simplex base has a = r + 1 points");
        break;
    case BaseKind::cube:
        if (r > 20 || a != (Index(1) << r)) throw InvalidInput("PlantedModel: cube base has a = 2^r points");
        break;
    case BaseKind::custom:
        if (!custom_base) throw InvalidInput("PlantedModel: custom base missing");
        if (custom_base->dim() != r) throw InvalidInput("PlantedModel: custom base must have dimension r");
        if (custom_base->size() != a) throw InvalidInput("PlantedModel: custom base must have a points");
        break;
    }
}

namespace {

double min_cross_class_distance(const LabeledDataset& ds) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ds.size(); ++i)
        for (Index j = i + 1; j < ds.size(); ++j)
            if (ds.label(i) != ds.label(j)) best = std::min(best, (ds.point(i) - ds.point(j)).norm());
    return best;
}

} // namespace

LabeledDataset planted_base(const PlantedModel& model) {
    model.validate();
    LabeledDataset base;
    switch (model.base) {
    case BaseKind::simplex: {
        auto s = generate_simplex_base(model.r, model.r + 1);
        base = LabeledDataset(s.points().leftCols(model.r), s.labels());
        break;
    }
    case BaseKind::cube:
        base = generate_cube_base(model.r);
        break;
    case BaseKind::custom:
        base = *model.custom_base;
        break;
    }
    const double gap = min_cross_class_distance(base);
    if (!(gap > 0) || !std::isfinite(gap)) throw DegenerateData("planted base has no positive cross-class distance");
    return LabeledDataset(base.points() * (model.delta / gap), base.labels());
}

PlantedSample generate_planted(const PlantedModel& model, std::uint64_t seed) {
    const LabeledDataset base = planted_base(model);
    Rng rng(seed);

    MatrixXd frame = MatrixXd::Identity(model.d, model.d);
    if (model.random_embedding) frame = random_orthogonal(model.d, rng);
    const MatrixXd t_basis = frame.leftCols(model.r);
    const MatrixXd perp_basis = frame.rightCols(model.d - model.r);

    PlantedSample out;
    out.basis = t_basis;
    out.pi = t_basis * t_basis.transpose();
    out.base = LabeledDataset(base.points() * t_basis.transpose(), base.labels());

    const Index n = model.a * model.b;
    MatrixXd pts(n, model.d);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    // Noise drawn in T^⊥ coordinates so it is exactly orthogonal to T.
    const MatrixXd noise = gaussian_matrix(n, model.d - model.r, rng) * model.sigma;
    for (Index i = 0; i < model.a; ++i)
        for (Index t = 0; t < model.b; ++t) {
            const Index row = i * model.b + t;
            pts.row(row) = out.base.point(i) + noise.row(row) * perp_basis.transpose();
            labels.push_back(base.label(i));
        }
    out.data = LabeledDataset(std::move(pts), std::move(labels));
    return out;
}

PlantedSample generate_figure1(std::uint64_t seed, const Figure1Params& params) {
    if (params.per_class < 1 || !(params.margin > 0) || !(params.jitter >= 0) || !(params.spread >= 0))
        throw InvalidInput("generate_figure1: bad parameters");
    constexpr Index d = 3;
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const MatrixXd frame = random_orthogonal(d, rng);
    const VectorXd u = frame.col(0);
    const MatrixXd perp = frame.rightCols(d - 1);

    const Index n = 2 * params.per_class;
    MatrixXd pts(n, d);
    MatrixXd base_pts(n, d);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const int label = i < params.per_class ? 1 : 2;
        const double side = label == 1 ? 1.0 : -1.0;
        const double along = side * (params.margin / 2 + params.jitter * unit(rng));
        Eigen::Vector2d g(normal(rng), normal(rng));
        base_pts.row(i) = along * u.transpose();
        pts.row(i) = base_pts.row(i) + params.spread * (perp * g).transpose();
        labels.push_back(label);
    }

    PlantedSample out;
    out.basis = u;
    out.pi = u * u.transpose();
    out.base = LabeledDataset(std::move(base_pts), labels);
    out.data = LabeledDataset(std::move(pts), std::move(labels));
    return out;
}

} // namespace sqz
