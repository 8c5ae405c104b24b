#pragma once

// Dual certificates for the SqueezeFit program.
//
// The dual of  min tr M  s.t. z^T M z >= Δ², 0 <= M <= I  is
//
//   max  Δ² Σ γ(z) - tr Y   s.t.  Σ γ(z) z z^T - Y <= I,  Y >= 0,  γ >= 0,
//
// so any feasible (γ, Y) lower-bounds tr M. Given a candidate optimum M with
// tight set Z0 = {z : z^T M z = Δ²} and fixed space E = {x : Mx = x}, a
// certificate is searched for among (γ, Y) with supp γ ⊆ Z0, Col Y ⊆ E and
//   M = Σ γ(z) (M^{1/2} z)(M^{1/2} z)^T - Y.
// For the 0+ variant (no M <= I cap) the same search runs with E = {0}, so
// Y = 0, and Δ = 1.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "squeezefit/constraints.hpp"

namespace sqz {

/// γ is stored per unordered representative z; it equals γ(z) + γ(-z) in the
/// signed convention, since both signs contribute the same z z^T.
struct DualCertificate {
    ConstraintSet constraints;                    // the vectors γ refers to
    std::vector<std::pair<Index, double>> gamma;  // (index into constraints, value)
    MatrixXd Y;

    /// Σ γ(z) z z^T.
    MatrixXd weighted_gram() const;
};

double dual_objective(const DualCertificate& cert, double delta);

/// Invariant residuals of (γ, Y) as a point of the dual program.
struct DualFeasibility {
    double dual_psd = 0;          // λ_max(Σ γ z z^T - Y - I)_+
    double gamma_negativity = 0;  // max(-γ)_+
    double y_negativity = 0;      // max(-λ_min(Y))_+
    double max() const { return std::max({dual_psd, gamma_negativity, y_negativity}); }
};

/// `identity_cap` false checks the 0+ dual, where Y must vanish.
DualFeasibility dual_feasibility(const DualCertificate& cert, bool identity_cap = true);

/// Residuals of the certificate search.
struct FindcertResiduals {
    DualFeasibility dual;
    double col_y = 0;       // |Π_{E⊥} Y Π_{E⊥}|_F
    double m_equation = 0;  // |M - Σ γ (M^{1/2}z)(M^{1/2}z)^T + Y|_F
    double max() const { return std::max({dual.max(), col_y, m_equation}); }
    std::map<std::string, double> named() const;
};

FindcertResiduals findcert_residuals(const DualCertificate& cert, const MatrixXd& m, const MatrixXd& fixed_basis);

/// Indices of constraints with |z^T M z - Δ²| <= tol·Δ².
std::vector<Index> tight_constraints(const MatrixXd& m, const ConstraintSet& z, double delta, double tol = 1e-6);

/// Orthonormal basis (columns) of {x : Mx = x}: eigenvectors with eigenvalue >= 1 - tol.
MatrixXd fixed_space(const MatrixXd& m, double tol = 1e-6);

struct FindcertOptions {
    int max_iters = 50000;
    double tol = 1e-7;
    int check_every = 50;
    /// Give up once the worst residual improves by less than 1% over this many iterations.
    int plateau_window = 5000;
};

struct FindcertResult {
    bool converged = false;  // residuals met options.tol
    /// Best iterate seen (smallest worst residual); empty only if nothing was checked.
    std::optional<DualCertificate> certificate;
    FindcertResiduals residuals;  // of `certificate`
    int iterations = 0;
};

/// Douglas-Rachford splitting between the affine set of the findcert
/// equalities and the cones {γ >= 0, Y >= 0} and {Y >= Σ γ z z^T - I}.
/// `tight` holds the constraint vectors of Z0.
FindcertResult find_certificate(const MatrixXd& m, const ConstraintSet& tight, const MatrixXd& fixed_basis,
                                const FindcertOptions& options = {});

/// Certificate built from contact vectors that span T = Col(pi):
/// γ ≡ 1/λ on every signed contact and Y = X/λ - Π, with X the signed contact
/// Gram sum and λ its smallest nonzero eigenvalue.
DualCertificate contact_span_certificate(const ConstraintSet& contacts, const MatrixXd& pi);

enum class Verdict { certified, gap_only, failed };
std::string to_string(Verdict v);

struct CertificateReport {
    double primal_value = 0;
    double dual_value = 0;
    double gap = 0;
    double min_length = 0;
    Index tight_set_size = 0;
    std::map<std::string, double> residuals;
    Verdict verdict = Verdict::failed;
    bool feasible = false;
    std::optional<std::pair<Index, Index>> violating_pair;
    std::optional<DualCertificate> certificate;
    std::string message;
};

struct CertifyOptions {
    bool zero_plus = false;  // certify the 0+ variant (Δ fixed to 1, no M <= I cap)
    double tol_feas = 1e-6;
    /// Independent dual bound (e.g. from the solver) used for the gap_only verdict.
    std::optional<double> dual_bound;
    FindcertOptions findcert;
};

/// Two-step certification: (i) shortest cross-class vectors under M decide
/// feasibility and yield Z0; (ii) find_certificate. Retries once with a
/// tightness tolerance ten times wider.
CertificateReport certify(const LabeledDataset& ds, const MatrixXd& m, double delta, const CertifyOptions& options = {});

struct TightCount {
    Index count = 0;
    Index bound = 0;  // (C(d+1,2) + 1)^2
    bool exceeds = false;
};

TightCount count_tight_vs_bound(const MatrixXd& m, const ConstraintSet& z, double delta, Index d, double tol = 1e-6);

} // namespace sqz
