#pragma once

// Dense symmetric linear algebra shared by every other module: sorted
// eigendecompositions, projections onto the spectahedron {0 <= M <= I} and the
// PSD cone, square roots, rounding to orthogonal projections, and distances
// between projections.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "squeezefit/errors.hpp"

namespace sqz {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Eigenvalues sorted descending; eigenvectors as columns, each signed so its
/// largest-magnitude component is positive.
template <typename Scalar>
struct EigenDecomposition {
    Vec<Scalar> values;
    Mat<Scalar> vectors;
};

template <typename Scalar>
struct RankRounding {
    Index rank = 0;
    Mat<Scalar> projection;
};

template <typename Scalar>
struct ProjectionDistance {
    Scalar frobenius = 0;
    Scalar max_principal_angle_deg = 0;
};

namespace detail {

template <typename Derived>
typename Derived::Scalar max_abs_or_one(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    if (a.size() == 0) return Scalar(1);
    return std::max(Scalar(1), a.cwiseAbs().maxCoeff());
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* what) {
    if (a.rows() != a.cols()) throw InvalidInput(std::string(what) + ": matrix is not square");
}

} // namespace detail

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a,
                  typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-12)) {
    if (a.rows() != a.cols()) return false;
    if (a.size() == 0) return true;
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * detail::max_abs_or_one(a);
}

/// V diag(values) V^T, symmetrized to kill rounding asymmetry.
template <typename DerivedV, typename DerivedL>
Mat<typename DerivedV::Scalar> reassemble(const Eigen::MatrixBase<DerivedV>& vectors,
                                          const Eigen::MatrixBase<DerivedL>& values) {
    Mat<typename DerivedV::Scalar> out = vectors * values.asDiagonal() * vectors.transpose();
    return (out + out.transpose()) / 2;
}

template <typename Derived>
EigenDecomposition<typename Derived::Scalar> eig_sym(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    detail::require_square(a, "eig_sym");
    if (!a.allFinite()) throw InvalidInput("eig_sym: non-finite entries");
    if (!is_symmetric(a)) throw InvalidInput("eig_sym: matrix is not symmetric");

    const Index d = a.rows();
    EigenDecomposition<Scalar> out;
    if (d == 0) return out;

    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(a.eval());
    if (solver.info() != Eigen::Success) throw InvalidInput("eig_sym: eigensolver did not converge");

    // Eigen sorts ascending.
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    for (Index j = 0; j < d; ++j) {
        Index arg = 0;
        out.vectors.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.vectors(arg, j) < 0) out.vectors.col(j) *= Scalar(-1);
    }
    return out;
}

/// Euclidean projection onto {0 <= M <= I}: clamp the spectrum to [0, 1].
template <typename Derived>
Mat<typename Derived::Scalar> project_spectahedron(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    auto eig = eig_sym(a);
    return reassemble(eig.vectors, eig.values.cwiseMax(Scalar(0)).cwiseMin(Scalar(1)));
}

/// Euclidean projection onto the PSD cone.
template <typename Derived>
Mat<typename Derived::Scalar> project_psd(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    auto eig = eig_sym(a);
    return reassemble(eig.vectors, eig.values.cwiseMax(Scalar(0)));
}

template <typename Derived>
Mat<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    auto eig = eig_sym(a);
    if (eig.values.size() == 0) return Mat<Scalar>(0, 0);
    const Scalar scale = detail::max_abs_or_one(a);
    if (eig.values.minCoeff() < Scalar(-1e-6) * scale)
        throw NotPsd("psd_sqrt: minimum eigenvalue " + std::to_string(double(eig.values.minCoeff())));
    return reassemble(eig.vectors, eig.values.cwiseMax(Scalar(0)).cwiseSqrt());
}

/// Snap eigenvalues within `tol` of 0 or 1 onto those values. Used to clean
/// first-order iterates before reading off their kernel and fixed space.
template <typename Derived>
Mat<typename Derived::Scalar> snap_spectrum(const Eigen::MatrixBase<Derived>& a,
                                            typename Derived::Scalar tol) {
    using Scalar = typename Derived::Scalar;
    auto eig = eig_sym(a);
    Vec<Scalar> values = eig.values;
    for (Index i = 0; i < values.size(); ++i) {
        if (std::abs(values(i)) <= tol) values(i) = 0;
        else if (std::abs(values(i) - 1) <= tol) values(i) = 1;
    }
    return reassemble(eig.vectors, values);
}

template <typename Derived>
RankRounding<typename Derived::Scalar> rank_round(const Eigen::MatrixBase<Derived>& m,
                                                  typename Derived::Scalar threshold) {
    using Scalar = typename Derived::Scalar;
    if (!(threshold > 0 && threshold < 1)) throw InvalidInput("rank_round: threshold must lie in (0,1)");
    auto eig = eig_sym(m);
    RankRounding<Scalar> out;
    const Index d = m.rows();
    while (out.rank < d && eig.values(out.rank) > threshold) ++out.rank;
    const auto basis = eig.vectors.leftCols(out.rank);
    out.projection = basis * basis.transpose();
    out.projection = (out.projection + out.projection.transpose()).eval() / 2;
    return out;
}

/// Orthonormal basis of the range of an orthogonal projection.
template <typename Derived>
Mat<typename Derived::Scalar> projection_basis(const Eigen::MatrixBase<Derived>& p) {
    using Scalar = typename Derived::Scalar;
    auto eig = eig_sym(p);
    Index rank = 0;
    while (rank < p.rows() && eig.values(rank) > Scalar(0.5)) ++rank;
    return eig.vectors.leftCols(rank);
}

template <typename Derived>
bool is_projection(const Eigen::MatrixBase<Derived>& p,
                   typename Derived::Scalar tol = typename Derived::Scalar(1e-6)) {
    if (p.rows() != p.cols()) return false;
    if (p.size() == 0) return true;
    return is_symmetric(p, tol) && (p * p - p).cwiseAbs().maxCoeff() <= tol;
}

/// Frobenius distance and largest principal angle (degrees) between the ranges
/// of two orthogonal projections. Ranges of different dimension are at 90°.
template <typename DerivedP, typename DerivedQ>
ProjectionDistance<typename DerivedP::Scalar> projection_distance(const Eigen::MatrixBase<DerivedP>& p,
                                                                  const Eigen::MatrixBase<DerivedQ>& q) {
    using Scalar = typename DerivedP::Scalar;
    if (p.rows() != q.rows() || p.cols() != q.cols())
        throw InvalidInput("projection_distance: dimension mismatch");
    if (!is_projection(p) || !is_projection(q))
        throw InvalidInput("projection_distance: argument is not an orthogonal projection");

    ProjectionDistance<Scalar> out;
    out.frobenius = (p - q).norm();

    const Mat<Scalar> u = projection_basis(p);
    const Mat<Scalar> v = projection_basis(q);
    if (u.cols() != v.cols()) {
        out.max_principal_angle_deg = Scalar(90);
        return out;
    }
    if (u.cols() == 0) return out;

    // sin of the largest principal angle is the spectral norm of (I - Q) U;
    // computing it this way stays accurate for nearly identical subspaces.
    const Mat<Scalar> residual = u - v * (v.transpose() * u);
    Eigen::JacobiSVD<Mat<Scalar>> svd(residual);
    const Scalar s = std::min(Scalar(1), svd.singularValues()(0));
    out.max_principal_angle_deg = std::asin(s) * Scalar(180) / std::numbers::pi_v<Scalar>;
    return out;
}

} // namespace sqz
