#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sqz {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// n labeled points in R^d, stored one point per row. Labels are arbitrary
/// integers; the class count is the number of distinct labels.
class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(MatrixXd points, std::vector<int> labels);

    const MatrixXd& points() const noexcept { return points_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    auto point(Index i) const { return points_.row(i); }
    int label(Index i) const { return labels_[static_cast<std::size_t>(i)]; }

    Index size() const noexcept { return points_.rows(); }
    Index dim() const noexcept { return points_.cols(); }

    /// Sorted distinct labels.
    std::vector<int> classes() const;
    int num_classes() const { return static_cast<int>(classes().size()); }
    std::vector<Index> indices_of(int label) const;

    /// Same labels, points replaced by rows of `points * T^T`.
    LabeledDataset transformed(const MatrixXd& t) const;
    LabeledDataset subset(const std::vector<Index>& rows) const;

private:
    MatrixXd points_;
    std::vector<int> labels_;
};

struct CsvOptions {
    Index label_column = 0;
    bool skip_header = false;
};

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void save_csv(const LabeledDataset& ds, const std::filesystem::path& path);

/// MNIST-style IDX pair. Pixels are scaled to [0,1]. Rows whose label is not
/// in `keep_labels` are dropped; an empty set keeps everything.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        const std::set<int>& keep_labels = {});

/// Row-stochastic weights for area-weighted averaging of `in` samples into `out` bins.
MatrixXd area_weights(Index in, Index out);

/// Square images stored row-major, side_in^2 values per point.
LabeledDataset downsample_images(const LabeledDataset& ds, Index side_in, Index side_out);

/// One-dimensional block averaging of each feature vector, e.g. 200 bands -> 100.
LabeledDataset downsample_signals(const LabeledDataset& ds, Index dim_out);

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, double fraction,
                                                           std::uint64_t seed);

/// Uniform random subsample of `count` rows (all rows when count >= n).
LabeledDataset random_subsample(const LabeledDataset& ds, Index count, std::uint64_t seed);

} // namespace sqz
