#include "squeezefit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "squeezefit/errors.hpp"
#include "squeezefit/spectral.hpp"

namespace sqz {

MatrixXd pca(const LabeledDataset& ds, Index r, std::string* warning) {
    const Index d = ds.dim();
    if (r < 1 || r > d) throw InvalidInput("pca: need 1 <= r <= d");
    if (ds.size() == 0) throw InvalidInput("pca: empty dataset");
    const MatrixXd centered = ds.points().rowwise() - ds.points().colwise().mean();
    const MatrixXd cov = centered.transpose() * centered / static_cast<double>(ds.size());
    const auto eig = eig_sym(((cov + cov.transpose()) / 2).eval());
    const double cut = 1e-12 * std::max(1.0, eig.values(0));
    Index rank = 0;
    while (rank < d && eig.values(rank) > cut) ++rank;
    Index keep = r;
    if (r > rank) {
        keep = rank;
        if (warning) *warning = "pca: r = " + std::to_string(r) + " exceeds data rank " + std::to_string(rank);
    }
    const MatrixXd basis = eig.vectors.leftCols(keep);
    return basis * basis.transpose();
}

MatrixXd lda(const LabeledDataset& ds, std::optional<double> ridge) {
    const Index d = ds.dim();
    const auto classes = ds.classes();
    if (classes.size() < 2) throw InvalidInput("lda: need at least two classes");

    std::vector<VectorXd> means;
    MatrixXd within = MatrixXd::Zero(d, d);
    for (int c : classes) {
        const auto idx = ds.indices_of(c);
        VectorXd mu = VectorXd::Zero(d);
        for (Index i : idx) mu += ds.point(i).transpose();
        mu /= static_cast<double>(idx.size());
        for (Index i : idx) {
            const VectorXd x = ds.point(i).transpose() - mu;
            within.noalias() += x * x.transpose();
        }
        means.push_back(std::move(mu));
    }
    const double eps = ridge ? *ridge : 1e-6 * within.trace() / static_cast<double>(d);
    const MatrixXd reg = within + eps * MatrixXd::Identity(d, d);

    double scale = 0;
    for (const auto& mu : means) scale = std::max(scale, mu.norm());

    if (classes.size() == 2) {
        const VectorXd diff = means[0] - means[1];
        if (diff.norm() <= 1e-12 * std::max(1.0, scale)) throw DegenerateLda("lda: class centroids coincide");
        const VectorXd w = reg.ldlt().solve(diff);
        if (!w.allFinite() || w.norm() == 0) throw DegenerateLda("lda: scatter is singular");
        const VectorXd u = w.normalized();
        return u * u.transpose();
    }

    VectorXd grand = VectorXd::Zero(d);
    for (Index i = 0; i < ds.size(); ++i) grand += ds.point(i).transpose();
    grand /= static_cast<double>(ds.size());
    MatrixXd between = MatrixXd::Zero(d, d);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const VectorXd off = means[c] - grand;
        between.noalias() += static_cast<double>(ds.indices_of(classes[c]).size()) * off * off.transpose();
    }
    if (between.norm() <= 1e-24 * std::max(1.0, scale * scale)) throw DegenerateLda("lda: class centroids coincide");
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(between, reg);
    if (solver.info() != Eigen::Success) throw DegenerateLda("lda: generalized eigenproblem failed");
    const VectorXd vals = solver.eigenvalues();  // ascending
    const Index want = std::min<Index>(static_cast<Index>(classes.size()) - 1, d);
    const double top = vals(d - 1);
    Index keep = 0;
    while (keep < want && vals(d - 1 - keep) > 1e-12 * std::max(1.0, top)) ++keep;
    const MatrixXd dirs = solver.eigenvectors().rightCols(keep);
    Eigen::HouseholderQR<MatrixXd> qr(dirs);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(d, keep);
    return q * q.transpose();
}

Classifier::Classifier(MatrixXd m_sqrt, MatrixXd reference, std::vector<int> labels, Index k)
    : m_sqrt_(std::move(m_sqrt)), labels_(std::move(labels)), k_(k), tree_(std::move(reference)) {
    if (k_ < 1 || k_ > tree_.size()) throw InvalidInput("Classifier: need 1 <= K <= reference count");
    if (static_cast<Index>(labels_.size()) != tree_.size()) throw InvalidInput("Classifier: label count mismatch");
}

int majority_label(const std::vector<Neighbor>& neighbors, const std::vector<int>& labels) {
    std::map<int, int> votes;  // ordered, so ties resolve to the smallest label
    for (const auto& nb : neighbors) ++votes[labels[static_cast<std::size_t>(nb.index)]];
    int best = 0, count = -1;
    for (const auto& [label, v] : votes)
        if (v > count) {
            best = label;
            count = v;
        }
    return best;
}

int Classifier::predict(const Eigen::Ref<const VectorXd>& raw_point) const {
    if (raw_point.size() != m_sqrt_.cols()) throw InvalidInput("knn_predict: dimension mismatch");
    const VectorXd q = m_sqrt_ * raw_point;
    return majority_label(tree_.knn(q, k_), labels_);
}

Classifier knn_fit(const LabeledDataset& train, const MatrixXd& m_sqrt, Index k) {
    if (m_sqrt.rows() != train.dim() || m_sqrt.cols() != train.dim())
        throw InvalidInput("knn_fit: transform has wrong dimension");
    return Classifier(m_sqrt, train.points() * m_sqrt.transpose(), train.labels(), k);
}

std::vector<int> knn_predict(const Classifier& clf, const MatrixXd& points) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(points.rows()));
    for (Index i = 0; i < points.rows(); ++i) out.push_back(clf.predict(points.row(i).transpose()));
    return out;
}

Prediction knn_predict(const Classifier& clf, const LabeledDataset& test) {
    Prediction out;
    out.labels = knn_predict(clf, test.points());
    Index wrong = 0;
    for (Index i = 0; i < test.size(); ++i)
        if (out.labels[static_cast<std::size_t>(i)] != test.label(i)) ++wrong;
    out.error_rate = test.size() ? static_cast<double>(wrong) / static_cast<double>(test.size()) : 0.0;
    return out;
}

} // namespace sqz
