#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace sqz {

/// Half-vectorization of symmetric d x d matrices, with √2 on off-diagonals so
/// the Euclidean norm matches the Frobenius norm.
class SymmetricPacking {
public:
    explicit SymmetricPacking(Eigen::Index d) : d_(d) {}
    Eigen::Index size() const { return d_ * (d_ + 1) / 2; }

    Eigen::VectorXd pack(const Eigen::MatrixXd& s) const {
        Eigen::VectorXd out(size());
        Eigen::Index k = 0;
        for (Eigen::Index j = 0; j < d_; ++j)
            for (Eigen::Index i = j; i < d_; ++i)
                out(k++) = i == j ? s(i, j) : std::sqrt(2.0) * (s(i, j) + s(j, i)) / 2;
        return out;
    }

    Eigen::MatrixXd unpack(const Eigen::Ref<const Eigen::VectorXd>& v) const {
        Eigen::MatrixXd out(d_, d_);
        Eigen::Index k = 0;
        for (Eigen::Index j = 0; j < d_; ++j)
            for (Eigen::Index i = j; i < d_; ++i) {
                const double val = i == j ? v(k) : v(k) / std::sqrt(2.0);
                out(i, j) = out(j, i) = val;
                ++k;
            }
        return out;
    }

private:
    Eigen::Index d_;
};

} // namespace sqz
