#include "squeezefit/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "squeezefit/errors.hpp"
#include "squeezefit/spectral.hpp"
#include "squeezefit/svec.hpp"

namespace sqz {

MatrixXd DualCertificate::weighted_gram() const {
    const Index d = Y.rows();
    MatrixXd q = MatrixXd::Zero(d, d);
    for (const auto& [k, g] : gamma) {
        const VectorXd& z = constraints.pairs[static_cast<std::size_t>(k)].z;
        q.noalias() += g * z * z.transpose();
    }
    return q;
}

double dual_objective(const DualCertificate& cert, double delta) {
    double sum = 0;
    for (const auto& entry : cert.gamma) sum += entry.second;
    return delta * delta * sum - cert.Y.trace();
}

DualFeasibility dual_feasibility(const DualCertificate& cert, bool identity_cap) {
    DualFeasibility out;
    const Index d = cert.Y.rows();
    for (const auto& entry : cert.gamma) out.gamma_negativity = std::max(out.gamma_negativity, -entry.second);
    if (d == 0) return out;
    const MatrixXd y = (cert.Y + cert.Y.transpose()) / 2;
    if (identity_cap) {
        out.y_negativity = std::max(0.0, -eig_sym(y).values.minCoeff());
    } else {
        out.y_negativity = y.norm();  // the 0+ dual has no Y
    }
    MatrixXd s = cert.weighted_gram() - y - MatrixXd::Identity(d, d);
    s = (s + s.transpose()) / 2;
    out.dual_psd = std::max(0.0, eig_sym(s).values(0));
    return out;
}

std::map<std::string, double> FindcertResiduals::named() const {
    return {{"dual_psd", dual.dual_psd},
            {"gamma_negativity", dual.gamma_negativity},
            {"y_negativity", dual.y_negativity},
            {"col_y", col_y},
            {"m_equation", m_equation}};
}

namespace {

MatrixXd orthogonal_complement(const MatrixXd& basis, Index d) {
    if (basis.cols() == 0) return MatrixXd::Identity(d, d);
    const MatrixXd perp = MatrixXd::Identity(d, d) - basis * basis.transpose();
    return projection_basis(((perp + perp.transpose()) / 2).eval());
}

} // namespace

FindcertResiduals findcert_residuals(const DualCertificate& cert, const MatrixXd& m, const MatrixXd& fixed_basis) {
    FindcertResiduals out;
    const Index d = m.rows();
    const bool cap = fixed_basis.cols() > 0;
    out.dual = dual_feasibility(cert, true);
    if (!cap) out.dual.y_negativity = std::max(out.dual.y_negativity, 0.0);

    const MatrixXd perp = orthogonal_complement(fixed_basis, d);
    out.col_y = (perp.transpose() * cert.Y * perp).norm();

    const MatrixXd root = psd_sqrt(m);
    MatrixXd rhs = -cert.Y;
    for (const auto& [k, g] : cert.gamma) {
        const VectorXd w = root * cert.constraints.pairs[static_cast<std::size_t>(k)].z;
        rhs.noalias() += g * w * w.transpose();
    }
    out.m_equation = (m - rhs).norm();
    return out;
}

std::vector<Index> tight_constraints(const MatrixXd& m, const ConstraintSet& z, double delta, double tol) {
    const double d2 = delta * delta;
    std::vector<Index> out;
    if (z.empty()) return out;
    const MatrixXd zs = z.matrix();
    const VectorXd q = (zs * m).cwiseProduct(zs).rowwise().sum();
    for (Index i = 0; i < q.size(); ++i)
        if (std::abs(q(i) - d2) <= tol * d2) out.push_back(i);
    return out;
}

MatrixXd fixed_space(const MatrixXd& m, double tol) {
    const auto eig = eig_sym(m);
    Index e = 0;
    while (e < eig.values.size() && eig.values(e) >= 1 - tol) ++e;
    return eig.vectors.leftCols(e);
}

FindcertResult find_certificate(const MatrixXd& m, const ConstraintSet& tight, const MatrixXd& fixed_basis,
                                const FindcertOptions& options) {
    const Index d = m.rows();
    if (m.cols() != d) throw InvalidInput("find_certificate: M is not square");
    if (!tight.empty() && tight.dim != d) throw InvalidInput("find_certificate: constraint dimension mismatch");
    if (fixed_basis.rows() != d && fixed_basis.cols() > 0) throw InvalidInput("find_certificate: basis dimension mismatch");

    const Index m0 = tight.size();
    const SymmetricPacking pack(d);
    const Index p = pack.size();
    const MatrixXd zs = tight.matrix();
    const MatrixXd root = psd_sqrt(m);
    const MatrixXd ws = zs * root;  // rows (M^{1/2} z)^T
    const MatrixXd perp = orthogonal_complement(fixed_basis, d);
    const Index f = perp.cols();
    const SymmetricPacking pack_perp(f);

    // Unknowns x = [γ; svec Y; svec S] with slack S = I + Y - Σ γ z z^T.
    // The equalities cut out an affine set and (γ, Y, S) >= 0 is a product
    // cone; Douglas-Rachford finds a point in their intersection.
    const Index n = m0 + 2 * p;
    const Index rows = 2 * p + pack_perp.size();
    MatrixXd lin = MatrixXd::Zero(rows, n);
    VectorXd rhs = VectorXd::Zero(rows);
    for (Index k = 0; k < m0; ++k) {
        lin.block(0, k, p, 1) = pack.pack(ws.row(k).transpose() * ws.row(k));
        lin.block(p, k, p, 1) = pack.pack(zs.row(k).transpose() * zs.row(k));
    }
    lin.block(0, m0, p, p) = -MatrixXd::Identity(p, p);
    rhs.head(p) = pack.pack(m);
    lin.block(p, m0, p, p) = -MatrixXd::Identity(p, p);
    lin.block(p, m0 + p, p, p) = MatrixXd::Identity(p, p);
    rhs.segment(p, p) = pack.pack(MatrixXd::Identity(d, d));
    // Π_{E⊥} Y Π_{E⊥} = 0, written as F^T Y F = 0 column by column of svec(Y).
    for (Index c = 0; c < p; ++c) {
        VectorXd unit = VectorXd::Zero(p);
        unit(c) = 1;
        lin.block(2 * p, m0 + c, pack_perp.size(), 1) = pack_perp.pack(perp.transpose() * pack.unpack(unit) * perp);
    }
    // x - L^T (L L^T)^+ (L x - rhs); L L^T stays small when Z0 is large.
    MatrixXd normal_pinv = MatrixXd::Zero(rows, rows);
    {
        const MatrixXd normal = lin * lin.transpose();
        const auto eig = eig_sym(((normal + normal.transpose()) / 2).eval());
        const double cut = 1e-12 * std::max(1.0, eig.values(0));
        for (Index i = 0; i < rows; ++i)
            if (eig.values(i) > cut)
                normal_pinv.noalias() += eig.vectors.col(i) * eig.vectors.col(i).transpose() / eig.values(i);
    }

    auto project_affine = [&](const VectorXd& x) -> VectorXd {
        return x - lin.transpose() * (normal_pinv * (lin * x - rhs));
    };
    auto project_cone = [&](const VectorXd& x) -> VectorXd {
        VectorXd out(n);
        out.head(m0) = x.head(m0).cwiseMax(0.0);
        out.segment(m0, p) = pack.pack(project_psd(pack.unpack(x.segment(m0, p))));
        out.tail(p) = pack.pack(project_psd(pack.unpack(x.tail(p))));
        return out;
    };
    auto to_certificate = [&](const VectorXd& x) {
        DualCertificate cert;
        cert.constraints = tight;
        for (Index k = 0; k < m0; ++k)
            if (x(k) > 0) cert.gamma.emplace_back(k, x(k));
        cert.Y = pack.unpack(x.segment(m0, p));
        return cert;
    };

    FindcertResult out;
    VectorXd x = VectorXd::Zero(n);
    VectorXd increment = VectorXd::Zero(n);
    double best = std::numeric_limits<double>::infinity();
    double best_at_window_start = best;
    int window_start = 0;
    for (int it = 1; it <= options.max_iters; ++it) {
        out.iterations = it;
        const VectorXd a = project_affine(increment);
        x = project_cone(2 * a - increment);
        increment += x - a;

        if (it % options.check_every != 0 && it != 1) continue;
        DualCertificate cert = to_certificate(x);
        const FindcertResiduals residuals = findcert_residuals(cert, m, fixed_basis);
        const double worst = residuals.max();
        if (worst < best) {
            best = worst;
            out.certificate = std::move(cert);
            out.residuals = residuals;
        }
        if (worst <= options.tol) {
            out.converged = true;
            return out;
        }
        if (it - window_start >= options.plateau_window) {
            if (best > 0.99 * best_at_window_start) return out;
            best_at_window_start = best;
            window_start = it;
        }
    }
    return out;
}

DualCertificate contact_span_certificate(const ConstraintSet& contacts, const MatrixXd& pi) {
    const Index d = pi.rows();
    if (contacts.empty()) throw DegenerateContacts("contact_span_certificate: no contacts");
    const MatrixXd zs = contacts.matrix();
    const MatrixXd gram = 2.0 * zs.transpose() * zs;  // both signs of every contact
    const auto eig = eig_sym(((gram + gram.transpose()) / 2).eval());
    const double top = eig.values(0);
    double lambda = 0;
    for (Index i = eig.values.size() - 1; i >= 0; --i)
        if (eig.values(i) > 1e-10 * top) {
            lambda = eig.values(i);
            break;
        }
    if (!(lambda > 0)) throw DegenerateContacts("contact_span_certificate: contact Gram sum vanishes");

    DualCertificate cert;
    cert.constraints = contacts;
    for (Index k = 0; k < contacts.size(); ++k) cert.gamma.emplace_back(k, 2.0 / lambda);
    cert.Y = gram / lambda - pi;
    cert.Y = (cert.Y + cert.Y.transpose()) / 2;
    (void)d;
    return cert;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::gap_only: return "gap_only";
    case Verdict::failed: return "failed";
    }
    return "unknown";
}

CertificateReport certify(const LabeledDataset& ds, const MatrixXd& m_in, double delta, const CertifyOptions& options) {
    const Index d = ds.dim();
    if (m_in.rows() != d || m_in.cols() != d) throw InvalidInput("certify: M has wrong dimension");
    const double delta_eff = options.zero_plus ? 1.0 : delta;
    if (!(delta_eff > 0)) throw InvalidInput("certify: delta must be positive");

    const auto spectrum = eig_sym(m_in).values;
    if (d > 0 && (spectrum(d - 1) < -1e-6 || (!options.zero_plus && spectrum(0) > 1 + 1e-6)))
        throw InvalidInput("certify: M is outside the feasible cone");
    const MatrixXd m = snap_spectrum(m_in, 1e-9);

    CertificateReport report;
    report.primal_value = m.trace();
    // γ = 0, Y = 0 is always dual feasible, so the gap starts at tr M.
    report.gap = report.primal_value;

    const ShortestPairs shortest = cross_class_shortest(ds, m);
    report.min_length = shortest.min_length;
    report.feasible = shortest.min_length >= delta_eff * (1 - options.tol_feas);
    if (!report.feasible) {
        if (!shortest.pairs.empty()) report.violating_pair = shortest.pairs.front();
        report.verdict = Verdict::failed;
        report.message = "infeasible: shortest cross-class length " + std::to_string(shortest.min_length) +
                         " is below delta " + std::to_string(delta_eff);
        return report;
    }

    const MatrixXd basis = options.zero_plus ? MatrixXd(d, 0) : fixed_space(m);
    const double base_tol = 1e-6 * (1 + 1e3 * options.tol_feas);
    for (double tol : {base_tol, 10 * base_tol}) {
        // Tight pairs: squared length within tol of Δ².
        const double band = delta_eff * std::sqrt(1 + tol);
        ConstraintSet z0;
        z0.dim = d;
        if (shortest.min_length <= band) {
            const double rel = shortest.min_length > 0 ? band / shortest.min_length - 1 : 0.0;
            for (const auto& [i, j] : cross_class_shortest(ds, m, rel).pairs)
                z0.pairs.push_back(DifferencePair{i, j, (ds.point(i) - ds.point(j)).transpose()});
        }
        report.tight_set_size = z0.size();

        FindcertResult found = find_certificate(m, z0, basis, options.findcert);
        report.residuals = found.residuals.named();
        if (!found.certificate || found.residuals.max() > 1e-6) continue;

        const double dual = dual_objective(*found.certificate, delta_eff);
        if (report.primal_value - dual <= 1e-3 * std::max(1.0, report.primal_value)) {
            report.dual_value = dual;
            report.gap = report.primal_value - dual;
            report.certificate = std::move(found.certificate);
            report.verdict = Verdict::certified;
            report.message = "certified optimal";
            return report;
        }
    }

    if (options.dual_bound && report.primal_value - *options.dual_bound <= 0.01 * std::max(1.0, report.primal_value)) {
        report.verdict = Verdict::gap_only;
        report.dual_value = *options.dual_bound;
        report.gap = report.primal_value - *options.dual_bound;
        report.message = "no certificate; supplied dual bound closes the gap to within 1%";
        return report;
    }
    report.verdict = Verdict::failed;
    report.message = "feasible, but no dual certificate found";
    return report;
}

TightCount count_tight_vs_bound(const MatrixXd& m, const ConstraintSet& z, double delta, Index d, double tol) {
    TightCount out;
    out.count = static_cast<Index>(tight_constraints(m, z, delta, tol).size());
    const Index sym = d * (d + 1) / 2;
    out.bound = (sym + 1) * (sym + 1);
    out.exceeds = out.count >= out.bound;
    return out;
}

} // namespace sqz
