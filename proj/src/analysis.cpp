#include "squeezefit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "squeezefit/errors.hpp"
#include "squeezefit/random.hpp"
#include "squeezefit/solver.hpp"
#include "squeezefit/spectral.hpp"

namespace sqz {

ConstraintSet contact_vectors(const ConstraintSet& z, double rel_tol) {
    if (z.empty()) throw NoConstraints("contact_vectors: constraint set is empty");
    double shortest = std::numeric_limits<double>::infinity();
    for (const auto& p : z.pairs) shortest = std::min(shortest, p.z.norm());
    ConstraintSet out;
    out.dim = z.dim;
    for (const auto& p : z.pairs)
        if (p.z.norm() <= shortest * (1 + rel_tol)) out.pairs.push_back(p);
    return out;
}

CertifiedSolution certified_solve(const LabeledDataset& ds, double delta) {
    SqueezeConfig config;
    config.delta = delta;
    const SqueezeResult result = solve_hard(build_constraints_full(ds), config);
    CertifiedSolution out;
    out.M = result.M;
    CertifyOptions options;
    options.dual_bound = result.lower_bound;
    out.report = certify(ds, result.M, delta, options);
    out.certified = out.report.verdict == Verdict::certified;
    return out;
}

DeltaFixedResult is_delta_fixed(const LabeledDataset& ds, double delta, const CertifiedSolver& solve) {
    CertifiedSolution sol = solve(ds, delta);
    if (!sol.certified) throw Inconclusive("is_delta_fixed: solve was not certified");
    DeltaFixedResult out;
    out.M = std::move(sol.M);
    out.fixed = true;
    for (Index i = 0; i < ds.size(); ++i) {
        const VectorXd x = ds.point(i).transpose();
        if ((out.M * x - x).norm() > 1e-5 * std::max(1.0, x.norm())) {
            out.fixed = false;
            break;
        }
    }
    return out;
}

namespace {

MatrixXd row_span_projection(const MatrixXd& rows) {
    const Index d = rows.cols();
    if (rows.rows() == 0) return MatrixXd::Zero(d, d);
    Eigen::JacobiSVD<MatrixXd> svd(rows, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = 1e-6 * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
    Index rank = 0;
    while (rank < s.size() && s(rank) > cut) ++rank;
    const MatrixXd v = svd.matrixV().leftCols(rank);
    return v * v.transpose();
}

} // namespace

SqueezeOnceReport squeeze_once_check(const LabeledDataset& ds, double delta, const CertifiedSolver& solve) {
    SqueezeOnceReport out;
    CertifiedSolution first = solve(ds, delta);
    if (!first.certified) throw Inconclusive("squeeze_once_check: first solve was not certified");
    out.M = std::move(first.M);

    const LabeledDataset squeezed = ds.transformed(psd_sqrt(out.M));
    // M meets the constraints only to solver accuracy; never ask for more than
    // the squeezed data can give.
    const double reachable = cross_class_shortest(squeezed, MatrixXd::Identity(ds.dim(), ds.dim())).min_length;
    CertifiedSolution second = solve(squeezed, std::min(delta, reachable));
    if (!second.certified) throw Inconclusive("squeeze_once_check: second solve was not certified");
    out.N = std::move(second.M);

    out.span_projection = row_span_projection(squeezed.points());
    out.projection_error = (out.N - out.span_projection).norm();
    out.trace_m = out.M.trace();
    out.trace_n = out.N.trace();
    out.m_is_projection = is_projection(out.M, 1e-6);
    out.holds = out.projection_error <= 1e-2;
    if (out.m_is_projection)
        out.holds = out.holds && std::abs(out.trace_n - out.trace_m) <= 1e-3 * std::max(1.0, out.trace_m);
    return out;
}

double snr(double lambda, Index r, double sigma_sq) {
    if (!(lambda > 0) || r < 1 || !(sigma_sq > 0)) throw InvalidInput("snr: inputs must be positive");
    return lambda / (2.0 * static_cast<double>(r) * sigma_sq);
}

double lambda_min_nonzero(const ConstraintSet& contacts) {
    if (contacts.empty()) throw DegenerateContacts("lambda_min_nonzero: no contacts");
    const MatrixXd zs = contacts.matrix();
    const MatrixXd gram = 2.0 * zs.transpose() * zs;
    const VectorXd values = eig_sym(((gram + gram.transpose()) / 2).eval()).values;
    const double top = values(0);
    if (!(top > 0)) throw DegenerateContacts("lambda_min_nonzero: contact Gram sum vanishes");
    for (Index i = values.size() - 1; i >= 0; --i)
        if (values(i) > 1e-10 * top) return values(i);
    return top;
}

void ConeSpec::validate() const {
    if (n < 1) throw InvalidInput("ConeSpec: n must be >= 1");
    if (!(c1 > 0)) throw InvalidInput("ConeSpec: c1 must be positive");
}

namespace {

constexpr int kDykstraCap = 10000;
constexpr double kDykstraResidual = 1e-8;

double cap_ratio(const ConeSpec& cone) {
    const double n = static_cast<double>(cone.n);
    return cone.c1 * std::sqrt(std::log(n)) / n;
}

double cap_violation(const VectorXd& v, double t) {
    const double bound = t * v.sum();
    return std::max(0.0, std::max(-v.minCoeff(), v.maxCoeff() - bound));
}

} // namespace

VectorXd project_cone(const ConeSpec& cone, const VectorXd& g, bool* converged) {
    cone.validate();
    if (g.size() != cone.n) throw InvalidInput("project_cone: dimension mismatch");
    if (converged) *converged = true;
    VectorXd v = g.cwiseMax(0.0);
    if (cone.kind == ConeSpec::Kind::orthant) return v;

    const double t = cap_ratio(cone);
    if (cap_violation(v, t) <= kDykstraResidual) return v;

    // Dykstra over {v_i >= 0} and {v_i - t·1^T v <= 0}, starting from g.
    const Index n = cone.n;
    v = g;
    MatrixXd inc = MatrixXd::Zero(n, 2 * n);
    const double cap_norm2 = (1 - t) * (1 - t) + t * t * static_cast<double>(n - 1);
    for (int it = 0; it < kDykstraCap; ++it) {
        const VectorXd before = v;
        for (Index h = 0; h < 2 * n; ++h) {
            VectorXd y = v + inc.col(h);
            if (h < n) {
                y(h) = std::max(0.0, y(h));
            } else {
                const Index i = h - n;
                const double excess = y(i) - t * y.sum();
                if (excess > 0) {
                    const double step = excess / cap_norm2;
                    y.array() += step * t;
                    y(i) -= step;
                }
            }
            inc.col(h) = v + inc.col(h) - y;
            v = y;
        }
        if (cap_violation(v, t) <= kDykstraResidual && (v - before).norm() <= kDykstraResidual) return v;
    }
    if (converged) *converged = false;
    return v;
}

StatDimEstimate estimate_stat_dim(const ConeSpec& cone, int trials, std::uint64_t seed, int threads) {
    cone.validate();
    if (trials < 100) throw InvalidInput("estimate_stat_dim: need at least 100 trials");
    std::vector<double> values(static_cast<std::size_t>(trials));
    std::vector<char> ok(static_cast<std::size_t>(trials), 1);

    auto run = [&](int begin, int stride) {
        for (int k = begin; k < trials; k += stride) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
            const VectorXd g = gaussian_matrix(cone.n, 1, rng);
            bool converged = true;
            values[static_cast<std::size_t>(k)] = project_cone(cone, g, &converged).squaredNorm();
            ok[static_cast<std::size_t>(k)] = converged;
        }
    };
    const int workers = std::max(1, std::min(threads, trials));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
        for (auto& t : pool) t.join();
    }

    StatDimEstimate out;
    double sum = 0;
    for (double v : values) sum += v;
    out.estimate = sum / trials;
    double ss = 0;
    for (double v : values) ss += (v - out.estimate) * (v - out.estimate);
    out.stderr_ = std::sqrt(ss / (trials - 1) / trials);
    out.reliable = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
    return out;
}

RecoveryReport recovery_report(const MatrixXd& m, const MatrixXd& pi_true) {
    const auto rounded = rank_round(m, 0.5);
    const auto dist = projection_distance(rounded.projection, pi_true);
    RecoveryReport out;
    out.frobenius = dist.frobenius;
    out.angle_deg = dist.max_principal_angle_deg;
    out.rank = rounded.rank;
    out.rank_match = static_cast<double>(rounded.rank) == std::round(pi_true.trace());
    return out;
}

} // namespace sqz
