#include "squeezefit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "squeezefit/errors.hpp"
#include "squeezefit/spectral.hpp"
#include "squeezefit/svec.hpp"

namespace sqz {

std::string to_string(SqueezeMode mode) {
    switch (mode) {
    case SqueezeMode::hard: return "hard";
    case SqueezeMode::hinge: return "hinge";
    case SqueezeMode::zero_plus: return "zero_plus";
    case SqueezeMode::hinge_zero_plus: return "hinge_zero_plus";
    }
    return "unknown";
}

SqueezeMode parse_mode(const std::string& name) {
    if (name == "hard") return SqueezeMode::hard;
    if (name == "hinge") return SqueezeMode::hinge;
    if (name == "zero_plus") return SqueezeMode::zero_plus;
    if (name == "hinge_zero_plus") return SqueezeMode::hinge_zero_plus;
    throw InvalidInput("unknown mode '" + name + "'");
}

void SqueezeConfig::validate() const {
    if (!relaxes_identity(mode) && !(delta > 0)) throw InvalidInput("SqueezeConfig: delta must be positive");
    if (is_hinge(mode) && !(lambda > 0)) throw InvalidInput("SqueezeConfig: lambda must be positive");
    if (max_iters < 1) throw InvalidInput("SqueezeConfig: max_iters must be >= 1");
    if (!(tol_obj > 0) || !(tol_feas > 0)) throw InvalidInput("SqueezeConfig: tolerances must be positive");
    if (!(step.c > 0)) throw InvalidInput("SqueezeConfig: step constant must be positive");
    if (!(rho > 0)) throw InvalidInput("SqueezeConfig: rho must be positive");
}

VectorXd quadratic_forms(const MatrixXd& m, const MatrixXd& zs) {
    if (zs.rows() == 0) return VectorXd(0);
    return (zs * m).cwiseProduct(zs).rowwise().sum();
}

double hinge_objective(const MatrixXd& m, const ConstraintSet& z, double delta, double lambda) {
    const VectorXd q = quadratic_forms(m, z.matrix());
    return m.trace() + lambda * (delta * delta - q.array()).max(0.0).sum();
}

MatrixXd hinge_subgradient(const MatrixXd& m, const ConstraintSet& z, double delta, double lambda) {
    const MatrixXd zs = z.matrix();
    const VectorXd q = quadratic_forms(m, zs);
    const VectorXd w = (q.array() < delta * delta).cast<double>();
    return MatrixXd::Identity(m.rows(), m.cols()) - lambda * zs.transpose() * w.asDiagonal() * zs;
}

double hinge_dual_bound(const MatrixXd& zs, const VectorXd& gamma, double delta, bool identity_cap) {
    const Index d = zs.cols();
    const MatrixXd q = zs.transpose() * gamma.asDiagonal() * zs;
    const auto eig = eig_sym(((q + q.transpose()) / 2).eval());
    if (identity_cap) {
        const double excess = (eig.values.array() - 1.0).max(0.0).sum();
        return delta * delta * gamma.sum() - excess;
    }
    const double top = d > 0 ? eig.values(0) : 0.0;
    return delta * delta * gamma.sum() / std::max(1.0, top);
}

namespace {

MatrixXd project_feasible_cone(const MatrixXd& a, bool identity_cap) {
    return identity_cap ? project_spectahedron(a) : project_psd(a);
}

double median_squared_norm(const MatrixXd& zs) {
    std::vector<double> norms(static_cast<std::size_t>(zs.rows()));
    for (Index r = 0; r < zs.rows(); ++r) norms[static_cast<std::size_t>(r)] = zs.row(r).squaredNorm();
    auto mid = norms.begin() + static_cast<std::ptrdiff_t>(norms.size() / 2);
    std::nth_element(norms.begin(), mid, norms.end());
    return *mid;
}

MatrixXd initial_iterate(const MatrixXd& zs, double delta) {
    const Index d = zs.cols();
    const double med = median_squared_norm(zs);
    const double scale = med > 0 ? std::min(1.0, delta * delta / med) : 1.0;
    return scale * MatrixXd::Identity(d, d);
}

SqueezeResult empty_result(Index d) {
    SqueezeResult out;
    out.M = MatrixXd::Zero(d, d);
    out.iterations = 1;
    out.converged = true;
    out.history.push_back({0.0, 0.0});
    return out;
}

void fill_diagnostics(SqueezeResult& res, const MatrixXd& zs, double delta, double lambda) {
    const VectorXd q = quadratic_forms(res.M, zs);
    const auto viol = (delta * delta - q.array()).max(0.0);
    res.objective = res.M.trace();
    res.worst_violation = zs.rows() > 0 ? viol.maxCoeff() : 0.0;
    res.hinge_value = res.objective + lambda * viol.sum();
}

} // namespace

SqueezeResult solve_hinge(const ConstraintSet& z, const SqueezeConfig& config) {
    config.validate();
    if (!is_hinge(config.mode)) throw InvalidInput("solve_hinge: mode must be hinge or hinge_zero_plus");
    const bool cap = !relaxes_identity(config.mode);
    const double delta = config.effective_delta();
    const double delta2 = delta * delta;
    const double lambda = config.lambda;
    const Index d = z.dim;
    if (z.empty()) return empty_result(d);

    const MatrixXd zs = z.matrix();
    const MatrixXd eye = MatrixXd::Identity(d, d);
    MatrixXd m = initial_iterate(zs, delta);

    SqueezeResult res;
    double best = std::numeric_limits<double>::infinity();
    MatrixXd best_m = m;
    double lower = 0.0;  // objective is nonnegative
    VectorXd gamma_sum = VectorXd::Zero(zs.rows());
    std::vector<double> best_trace;
    best_trace.reserve(static_cast<std::size_t>(config.max_iters));

    constexpr int window = 50;
    constexpr int bound_every = 10;
    for (int k = 1; k <= config.max_iters; ++k) {
        const VectorXd q = quadratic_forms(m, zs);
        const Eigen::ArrayXd viol = delta2 - q.array();
        const double f = m.trace() + lambda * viol.max(0.0).sum();
        res.history.push_back({f, std::max(0.0, viol.maxCoeff())});
        if (f < best) {
            best = f;
            best_m = m;
        }
        best_trace.push_back(best);
        res.iterations = k;

        const VectorXd active = (viol > 0.0).cast<double>();
        gamma_sum += lambda * active;
        if (k % bound_every == 0 || k == 1)
            lower = std::max(lower, hinge_dual_bound(zs, gamma_sum / double(k), delta, cap));

        const double scale = std::max(1.0, std::abs(best));
        if (best - lower <= config.tol_obj * scale) {
            res.converged = true;
            break;
        }
        if (k > window && best_trace[static_cast<std::size_t>(k - 1 - window)] - best < config.tol_obj * scale) {
            res.converged = true;
            break;
        }

        const MatrixXd g = eye - lambda * zs.transpose() * active.asDiagonal() * zs;
        const double g2 = g.squaredNorm();
        if (g2 == 0) {
            res.converged = true;
            break;
        }
        double t = 0;
        if (config.step.kind == StepRule::Kind::polyak) {
            t = config.step.c * (f - lower) / g2;
        } else {
            t = config.step.c / (std::sqrt(double(k)) * std::sqrt(g2));
        }
        m = project_feasible_cone(m - t * g, cap);
    }

    res.M = best_m;
    res.lower_bound = lower;
    fill_diagnostics(res, zs, delta, lambda);
    return res;
}

namespace {

// ADMM for  minimize <I, X>  s.t.  u_z^T X u_z >= b_z (z in the working set),
// X in K, with K the spectahedron or the PSD cone. Constraints are normalized
// (u_z = z/|z|, b_z = Δ²/|z|²). Splitting: A X = s with s >= b, and X = N
// with N in K. The X-update solves (A^T A + I) X = R through the Woodbury
// identity, so only the m x m matrix I + A A^T with (A A^T)_ij = (u_i^T u_j)^2
// is factored, or the svec form of I + A^T A when that is smaller.
class ConstrainedAdmm {
public:
    ConstrainedAdmm(Index d, bool cap, double rho) : d_(d), cap_(cap), rho_(rho) {
        x_ = n_ = v_ = MatrixXd::Zero(d, d);
    }

    void warm_start(const MatrixXd& m) { x_ = n_ = m; }

    void set_working_set(const MatrixXd& u, const VectorXd& b, const std::vector<Index>& keep_from_previous) {
        // Carry over scaled duals of constraints still present.
        VectorXd new_dual = VectorXd::Zero(u.rows());
        for (std::size_t i = 0; i < keep_from_previous.size(); ++i)
            if (keep_from_previous[i] >= 0) new_dual(static_cast<Index>(i)) = dual_(keep_from_previous[i]);
        u_ = u;
        b_ = b;
        dual_ = new_dual;
        const SymmetricPacking pack(d_);
        packed_ = u_.rows() > pack.size();
        if (packed_) {
            // More constraints than svec coordinates: factor I + W W^T directly.
            MatrixXd w(pack.size(), u_.rows());
            for (Index i = 0; i < u_.rows(); ++i) w.col(i) = pack.pack(u_.row(i).transpose() * u_.row(i));
            MatrixXd sys = w * w.transpose();
            sys.diagonal().array() += 1.0;
            chol_.compute(sys);
        } else {
            const MatrixXd gram = u_ * u_.transpose();
            MatrixXd sys = gram.cwiseProduct(gram);
            sys.diagonal().array() += 1.0;
            chol_.compute(sys);
        }
        s_ = apply_a(n_).cwiseMax(b_);
    }

    // Returns true on convergence within `max_iters`.
    bool run(int max_iters, double eps_abs, double eps_rel, std::vector<IterationRecord>* history,
             const VectorXd& norms2, int& used) {
        const MatrixXd eye = MatrixXd::Identity(d_, d_);
        constexpr double relax = 1.6;
        constexpr int kCheckEvery = 5;
        const double dim_scale = std::sqrt(double(u_.rows() + d_ * d_));
        used = 0;
        for (int it = 1; it <= max_iters; ++it) {
            used = it;
            const MatrixXd r = apply_at(s_ - dual_) + n_ - v_ - eye / rho_;
            if (packed_) {
                const SymmetricPacking pack(d_);
                x_ = pack.unpack(chol_.solve(pack.pack(r)));
            } else {
                x_ = r - apply_at(chol_.solve(apply_a(r)));
            }
            x_ = (x_ + x_.transpose()) / 2;
            const VectorXd ax = apply_a(x_);

            const VectorXd ax_hat = relax * ax + (1 - relax) * s_;
            const MatrixXd x_hat = relax * x_ + (1 - relax) * n_;
            const VectorXd s_old = s_;
            const MatrixXd n_old = n_;
            s_ = (ax_hat + dual_).cwiseMax(b_);
            n_ = project_feasible_cone(x_hat + v_, cap_);
            dual_ += ax_hat - s_;
            v_ += x_hat - n_;

            // Residuals are checked every few iterations; they cost as much as the step.
            if (it % kCheckEvery != 0 && it != 1) continue;
            const double r_prim = std::sqrt((ax - s_).squaredNorm() + (x_ - n_).squaredNorm());
            const double r_dual = rho_ * (apply_at(s_ - s_old) + (n_ - n_old)).norm();
            const double prim_scale = std::max(std::sqrt(ax.squaredNorm() + x_.squaredNorm()),
                                               std::sqrt(s_.squaredNorm() + n_.squaredNorm()));
            const double dual_scale = rho_ * (apply_at(dual_) + v_).norm();

            if (history) {
                double worst = 0;
                if (u_.rows() > 0) {
                    const VectorXd qn = apply_a(n_);
                    worst = std::max(0.0, ((b_ - qn).array() * norms2.array()).maxCoeff());
                }
                history->push_back({n_.trace(), worst});
            }

            if (r_prim <= dim_scale * eps_abs + eps_rel * prim_scale &&
                r_dual <= dim_scale * eps_abs + eps_rel * dual_scale && it > 1)
                return true;

            if (it % 25 == 0) {
                const double p = r_prim / std::max(prim_scale, 1e-300);
                const double q = r_dual / std::max(dual_scale, 1e-300);
                const double factor = std::sqrt(p / std::max(q, 1e-300));
                if ((factor > 5 || factor < 0.2) && rho_ * factor < 1e8 && rho_ * factor > 1e-8) rescale(factor);
            }
        }
        return false;
    }

    const MatrixXd& solution() const { return n_; }
    /// Multipliers of the normalized constraints.
    VectorXd multipliers() const { return (-rho_ * dual_).cwiseMax(0.0); }

private:
    VectorXd apply_a(const MatrixXd& x) const { return quadratic_forms(x, u_); }
    MatrixXd apply_at(const VectorXd& y) const {
        if (u_.rows() == 0) return MatrixXd::Zero(d_, d_);
        return u_.transpose() * y.asDiagonal() * u_;
    }
    void rescale(double factor) {
        rho_ *= factor;
        dual_ /= factor;
        v_ /= factor;
    }

    Index d_;
    bool cap_;
    double rho_;
    MatrixXd u_;
    VectorXd b_;
    Eigen::LLT<MatrixXd> chol_;
    bool packed_ = false;
    MatrixXd x_, n_, v_;
    VectorXd s_, dual_;
};

SqueezeResult solve_constrained(const ConstraintSet& z, const SqueezeConfig& config) {
    config.validate();
    const bool cap = !relaxes_identity(config.mode);
    const double delta = config.effective_delta();
    const double delta2 = delta * delta;
    const Index d = z.dim;
    if (z.empty()) return empty_result(d);

    const MatrixXd zs = z.matrix();
    const VectorXd norms2 = zs.rowwise().squaredNorm();
    if (norms2.minCoeff() <= 0) throw DegenerateData("zero difference vector in constraint set");
    if (cap) {
        Index arg = 0;
        const double shortest2 = norms2.minCoeff(&arg);
        if (shortest2 < delta2 * (1 - 1e-12))
            throw Infeasible("delta " + std::to_string(delta) + " exceeds the minimum cross-class distance " +
                                 std::to_string(std::sqrt(shortest2)),
                             delta);
    }
    const MatrixXd units = norms2.cwiseSqrt().cwiseInverse().asDiagonal() * zs;
    const VectorXd targets = delta2 * norms2.cwiseInverse();
    const Index m_all = zs.rows();

    // Seed the working set with the most demanding (shortest) constraints.
    std::vector<Index> order(static_cast<std::size_t>(m_all));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return targets(a) > targets(b); });
    const Index seed_size = std::min<Index>(m_all, std::max<Index>(50, 5 * d));
    std::vector<Index> working(order.begin(), order.begin() + seed_size);
    std::vector<char> in_set(static_cast<std::size_t>(m_all), 0);
    for (Index i : working) in_set[static_cast<std::size_t>(i)] = 1;

    ConstrainedAdmm admm(d, cap, config.rho);
    admm.warm_start(initial_iterate(zs, delta));

    SqueezeResult res;
    std::vector<Index> previous;
    bool inner_converged = false;
    int total = 0;
    // Coarse rounds grow the working set cheaply; once no constraint outside it
    // is violated at the coarse level, rounds switch to the fine tolerance.
    constexpr double coarse_eps = 1e-6;
    constexpr double fine_eps = 1e-10;
    constexpr int max_rounds = 200;
    bool fine = false;
    for (int round = 0; round < max_rounds && total < config.max_iters; ++round) {
        std::vector<Index> carry(working.size(), -1);
        for (std::size_t i = 0; i < previous.size() && i < working.size(); ++i) carry[i] = static_cast<Index>(i);
        admm.set_working_set(units(working, Eigen::all), targets(working), carry);
        const double eps = fine ? fine_eps : coarse_eps;
        int used = 0;
        inner_converged = admm.run(config.max_iters - total, eps, eps, &res.history, norms2(working), used);
        total += used;
        previous = working;

        const VectorXd q = quadratic_forms(admm.solution(), units);
        const double add_tol = fine ? 1e-9 : coarse_eps;
        std::vector<std::pair<double, Index>> violated;
        for (Index i = 0; i < m_all; ++i) {
            if (in_set[static_cast<std::size_t>(i)]) continue;
            const double rel = (targets(i) - q(i)) / targets(i);
            if (rel > add_tol) violated.emplace_back(-rel, i);
        }
        if (violated.empty()) {
            if (fine) break;
            fine = true;
            continue;
        }
        std::sort(violated.begin(), violated.end());
        const std::size_t add = std::min(violated.size(), std::max<std::size_t>(200, 2 * working.size()));
        for (std::size_t k = 0; k < add; ++k) {
            working.push_back(violated[k].second);
            in_set[static_cast<std::size_t>(violated[k].second)] = 1;
        }
        inner_converged = false;
    }
    res.iterations = total;

    // Clean the spectrum, then rescale if any constraint is still short.
    MatrixXd m = snap_spectrum(admm.solution(), 1e-8);
    const double ratio = quadratic_forms(m, zs).cwiseQuotient(VectorXd::Constant(m_all, delta2)).minCoeff();
    if (ratio < 1 && ratio > 0) m = project_feasible_cone(m / ratio, cap);
    res.M = m;

    // Dual bound from the ADMM multipliers of the working set.
    VectorXd gamma = admm.multipliers();
    const MatrixXd wz = zs(previous, Eigen::all);
    VectorXd gamma_raw = gamma.cwiseQuotient(norms2(previous));  // multipliers for unnormalized z
    res.lower_bound = hinge_dual_bound(wz, gamma_raw, delta, cap);
    res.gamma = VectorXd::Zero(m_all);
    res.gamma(previous) = gamma_raw;

    fill_diagnostics(res, zs, delta, 0.0);
    res.hinge_value = res.objective;
    res.converged = inner_converged && res.worst_violation <= config.tol_feas * delta2;
    return res;
}

} // namespace

SqueezeResult solve_hard(const ConstraintSet& z, const SqueezeConfig& config) {
    if (config.mode != SqueezeMode::hard) throw InvalidInput("solve_hard: mode must be hard");
    return solve_constrained(z, config);
}

SqueezeResult solve_zero_plus(const ConstraintSet& z, const SqueezeConfig& config) {
    if (config.mode != SqueezeMode::zero_plus) throw InvalidInput("solve_zero_plus: mode must be zero_plus");
    return solve_constrained(z, config);
}

SqueezeResult solve(const ConstraintSet& z, const SqueezeConfig& config) {
    switch (config.mode) {
    case SqueezeMode::hard: return solve_hard(z, config);
    case SqueezeMode::zero_plus: return solve_zero_plus(z, config);
    case SqueezeMode::hinge:
    case SqueezeMode::hinge_zero_plus: return solve_hinge(z, config);
    }
    throw InvalidInput("solve: unknown mode");
}

} // namespace sqz
