#pragma once

// Geometric diagnostics: contact vectors, Δ-fixedness, squeezing twice,
// planted-model SNR, recovery error and statistical dimension estimates.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "squeezefit/constraints.hpp"
#include "squeezefit/dataset.hpp"
#include "squeezefit/duality.hpp"

namespace sqz {

/// Pairs whose ||z|| is within rel_tol of the shortest one.
ConstraintSet contact_vectors(const ConstraintSet& z, double rel_tol = 1e-9);

/// Output of a solve that went through certification.
struct CertifiedSolution {
    MatrixXd M;
    bool certified = false;
    CertificateReport report;
};

using CertifiedSolver = std::function<CertifiedSolution(const LabeledDataset&, double delta)>;

/// solve_hard on Z(D) followed by certify.
CertifiedSolution certified_solve(const LabeledDataset& ds, double delta);

struct DeltaFixedResult {
    bool fixed = false;
    MatrixXd M;  // witness
};

/// Whether the optimizer satisfies Mx_i = x_i for all i, within 1e-5·max(1, |x_i|).
/// Throws Inconclusive when the solve is not certified.
DeltaFixedResult is_delta_fixed(const LabeledDataset& ds, double delta, const CertifiedSolver& solve = certified_solve);

struct SqueezeOnceReport {
    MatrixXd M;
    MatrixXd N;                // optimizer on the squeezed data
    MatrixXd span_projection;  // onto span{M^{1/2} x_i}
    double projection_error = 0;
    double trace_m = 0;
    double trace_n = 0;
    bool m_is_projection = false;
    /// projection_error <= 1e-2, plus the trace match when M is itself a projection.
    bool holds = false;
};

SqueezeOnceReport squeeze_once_check(const LabeledDataset& ds, double delta,
                                     const CertifiedSolver& solve = certified_solve);

/// λ / (2 r σ²).
double snr(double lambda_min_nonzero, Index r, double sigma_sq);

/// Smallest eigenvalue above 1e-10·λ_max of Σ 2 z z^T over the contact representatives.
double lambda_min_nonzero(const ConstraintSet& contacts);

struct ConeSpec {
    enum class Kind { orthant, paper_cone };
    Kind kind = Kind::orthant;
    Index n = 1;
    double c1 = 50;

    static ConeSpec orthant(Index n) { return {Kind::orthant, n, 50}; }
    static ConeSpec paper_cone(Index n, double c1 = 50) { return {Kind::paper_cone, n, c1}; }
    void validate() const;
};

/// Euclidean projection onto the cone. For paper_cone, `converged` reports
/// whether Dykstra met the residual within the iteration cap.
VectorXd project_cone(const ConeSpec& cone, const VectorXd& g, bool* converged = nullptr);

struct StatDimEstimate {
    double estimate = 0;
    double stderr_ = 0;
    bool reliable = true;
};

/// Monte Carlo mean of ||Π_C g||² over standard Gaussian g. trials >= 100.
StatDimEstimate estimate_stat_dim(const ConeSpec& cone, int trials, std::uint64_t seed, int threads = 1);

struct RecoveryReport {
    double frobenius = 0;
    double angle_deg = 0;
    bool rank_match = false;
    Index rank = 0;
};

/// rank_round(M, 0.5) against pi_true.
RecoveryReport recovery_report(const MatrixXd& m, const MatrixXd& pi_true);

} // namespace sqz
