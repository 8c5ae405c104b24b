#pragma once

// Solvers for the SqueezeFit family
//
//   hard             minimize tr M  s.t. z^T M z >= Δ² for all z,  0 <= M <= I
//   hinge            minimize tr M + λ Σ (Δ² - z^T M z)_+          0 <= M <= I
//   zero_plus        minimize tr M  s.t. z^T M z >= 1,             M >= 0
//   hinge_zero_plus  minimize tr M + λ Σ (1 - z^T M z)_+           M >= 0
//
// The hinge variants run projected subgradient descent. The constrained
// variants run ADMM over a working set of constraints that grows until every
// constraint holds, which yields iterates accurate enough for dual
// certification.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "squeezefit/constraints.hpp"

namespace sqz {

enum class SqueezeMode { hard, hinge, zero_plus, hinge_zero_plus };

std::string to_string(SqueezeMode mode);
SqueezeMode parse_mode(const std::string& name);

/// True for the variants whose feasible set has no M <= I cap.
constexpr bool relaxes_identity(SqueezeMode mode) {
    return mode == SqueezeMode::zero_plus || mode == SqueezeMode::hinge_zero_plus;
}
constexpr bool is_hinge(SqueezeMode mode) {
    return mode == SqueezeMode::hinge || mode == SqueezeMode::hinge_zero_plus;
}

struct StepRule {
    enum class Kind { polyak, diminishing };
    Kind kind = Kind::polyak;
    double c = 1.0;
};

struct SqueezeConfig {
    double delta = 1.0;  // fixed to 1 in the zero_plus variants
    SqueezeMode mode = SqueezeMode::hard;
    double lambda = 1.0;
    int max_iters = 20000;
    double tol_obj = 1e-6;
    double tol_feas = 1e-6;
    StepRule step;
    std::uint64_t seed = 0;
    /// ADMM penalty (constrained variants). Adapted during the solve.
    double rho = 1.0;

    void validate() const;
    double effective_delta() const { return relaxes_identity(mode) ? 1.0 : delta; }
};

struct IterationRecord {
    double objective = 0;
    double violation = 0;
};

struct SqueezeResult {
    MatrixXd M;
    double objective = 0;        // tr M
    double worst_violation = 0;  // max_z (Δ² - z^T M z)_+
    double hinge_value = 0;      // tr M + λ Σ (Δ² - z^T M z)_+
    double lower_bound = 0;      // best dual bound seen, when the method tracks one
    VectorXd gamma;              // dual multiplier per constraint (constrained variants)
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
};

/// z^T M z for every row z of `zs`.
VectorXd quadratic_forms(const MatrixXd& m, const MatrixXd& zs);

double hinge_objective(const MatrixXd& m, const ConstraintSet& z, double delta, double lambda);

/// I - λ Σ_{z^T M z < Δ²} z z^T. Ties contribute nothing.
MatrixXd hinge_subgradient(const MatrixXd& m, const ConstraintSet& z, double delta, double lambda);

/// Dual bound of the hinge program at multipliers γ in [0, λ]:
/// Δ² Σγ - tr(Σ γ z z^T - I)_+ with the identity cap, or Σγ' for γ rescaled to
/// Σ γ' z z^T <= I without it.
double hinge_dual_bound(const MatrixXd& zs, const VectorXd& gamma, double delta, bool identity_cap);

SqueezeResult solve_hinge(const ConstraintSet& z, const SqueezeConfig& config);
SqueezeResult solve_hard(const ConstraintSet& z, const SqueezeConfig& config);
SqueezeResult solve_zero_plus(const ConstraintSet& z, const SqueezeConfig& config);

/// Dispatch on config.mode.
SqueezeResult solve(const ConstraintSet& z, const SqueezeConfig& config);

} // namespace sqz
