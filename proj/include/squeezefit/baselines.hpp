#pragma once

// PCA, LDA and K-nearest-neighbor classification.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "squeezefit/dataset.hpp"
#include "squeezefit/kdtree.hpp"

namespace sqz {

/// Projection onto the top-r principal directions of the globally centered
/// data. Labels are ignored. When r exceeds the data rank the projection onto
/// the full data span is returned and `warning` (if given) is filled in.
MatrixXd pca(const LabeledDataset& ds, Index r, std::string* warning = nullptr);

/// Fisher discriminant subspace. Two classes give the rank-1 projection onto
/// (S_w + εI)^{-1}(μ_1 - μ_2); more classes solve S_b v = λ (S_w + εI) v and
/// keep up to k-1 directions. ε defaults to 1e-6·tr(S_w)/d.
MatrixXd lda(const LabeledDataset& ds, std::optional<double> ridge = std::nullopt);

/// Reference points stored after applying M^{1/2}; immutable once fitted.
class Classifier {
public:
    Classifier(MatrixXd m_sqrt, MatrixXd reference, std::vector<int> labels, Index k);

    Index k() const noexcept { return k_; }
    const MatrixXd& transform() const noexcept { return m_sqrt_; }
    const KdTree& tree() const noexcept { return tree_; }
    const std::vector<int>& labels() const noexcept { return labels_; }

    /// Majority vote among the K nearest references; ties go to the smaller label.
    int predict(const Eigen::Ref<const VectorXd>& raw_point) const;

private:
    MatrixXd m_sqrt_;
    std::vector<int> labels_;
    Index k_;
    KdTree tree_;
};

Classifier knn_fit(const LabeledDataset& train, const MatrixXd& m_sqrt, Index k);

struct Prediction {
    std::vector<int> labels;
    double error_rate = 0;  // fraction misclassified, against the dataset's labels
};

Prediction knn_predict(const Classifier& clf, const LabeledDataset& test);
std::vector<int> knn_predict(const Classifier& clf, const MatrixXd& points);

/// Vote over an ordered neighbor list (shared with the linear-scan oracle).
int majority_label(const std::vector<Neighbor>& neighbors, const std::vector<int>& labels);

} // namespace sqz
