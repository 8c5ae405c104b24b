#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "squeezefit/analysis.hpp"
#include "squeezefit/constraints.hpp"
#include "squeezefit/duality.hpp"
#include "squeezefit/errors.hpp"
#include "squeezefit/generators.hpp"
#include "squeezefit/solver.hpp"
#include "support.hpp"

using namespace sqz;
using namespace sqz::testing;

namespace {

LabeledDataset two_point() {
    MatrixXd x(2, 2);
    x << 1, 0, -1, 0;
    return LabeledDataset(x, {0, 1});
}

MatrixXd diag(std::initializer_list<double> values) {
    VectorXd v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values) v(i++) = x;
    return v.asDiagonal();
}

ConstraintSet single(double x, double y) {
    MatrixXd z(1, 2);
    z << x, y;
    return constraints_from_vectors(z);
}

double gamma_at(const DualCertificate& cert, Index k) {
    double total = 0;
    for (const auto& [i, v] : cert.gamma)
        if (i == k) total += v;
    return total;
}

} // namespace

TEST_CASE("dual_objective examples") {
    DualCertificate zero;
    zero.constraints = single(2, 0);
    zero.Y = MatrixXd::Zero(2, 2);
    CHECK(dual_objective(zero, 2) == 0);
    CHECK(dual_feasibility(zero).max() == 0);

    DualCertificate two = zero;
    two.gamma = {{0, 0.25}};
    CHECK(dual_objective(two, 2) == doctest::Approx(1));

    // Simplex base r = 2: γ(±e_i) = 1/2, so each stored representative carries 1.
    DualCertificate simplex;
    simplex.constraints = build_constraints_full(generate_simplex_base(2, 3));
    simplex.Y = MatrixXd::Zero(3, 3);
    simplex.gamma = {{0, 1.0}, {1, 1.0}};
    CHECK(dual_objective(simplex, 1) == doctest::Approx(2));
    CHECK(dual_feasibility(simplex).max() <= 1e-12);
}

TEST_CASE("tight_constraints examples") {
    CHECK(tight_constraints(diag({1, 0}), single(2, 0), 2) == std::vector<Index>{0});
    CHECK(tight_constraints(diag({1, 0}), single(3, 0), 2).empty());

    const ConstraintSet z = build_constraints_full(generate_simplex_base(2, 3));
    const auto tight = tight_constraints(diag({1, 1, 0}), z, 1);
    REQUIRE(tight.size() == 2);
    for (Index k : tight) {
        CHECK(z.pairs[static_cast<std::size_t>(k)].z.norm() == doctest::Approx(1));
        CHECK(z.pairs[static_cast<std::size_t>(k)].z.cwiseAbs().maxCoeff() == 1);
    }
}

TEST_CASE("fixed_space examples") {
    CHECK(fixed_space(MatrixXd::Identity(3, 3)).cols() == 3);
    const MatrixXd e = fixed_space(diag({1, 0.3, 0}));
    REQUIRE(e.cols() == 1);
    CHECK(std::abs(e(0, 0)) == doctest::Approx(1));
    CHECK(fixed_space(MatrixXd::Zero(3, 3)).cols() == 0);
}

TEST_CASE("find_certificate on the two-point instance") {
    const MatrixXd m = diag({1, 0});
    const FindcertResult r = find_certificate(m, single(2, 0), fixed_space(m));
    REQUIRE(r.converged);
    // Every γ >= 1/4 with Y = (4γ - 1) e1 e1^T works; the dual value is always 1.
    const double g = gamma_at(*r.certificate, 0);
    CHECK(g >= 0.25 - 1e-7);
    MatrixXd y = MatrixXd::Zero(2, 2);
    y(0, 0) = 4 * g - 1;
    CHECK((r.certificate->Y - y).norm() <= 1e-6);
    CHECK(dual_objective(*r.certificate, 2) == doctest::Approx(1).epsilon(1e-6));
    CHECK(r.residuals.max() <= 1e-7);
}

TEST_CASE("find_certificate on the simplex base") {
    const MatrixXd m = diag({1, 1, 0});
    const ConstraintSet z = build_constraints_full(generate_simplex_base(2, 3));
    ConstraintSet tight;
    tight.dim = 3;
    for (Index k : tight_constraints(m, z, 1)) tight.pairs.push_back(z.pairs[static_cast<std::size_t>(k)]);
    const FindcertResult r = find_certificate(m, tight, fixed_space(m));
    REQUIRE(r.converged);
    CHECK(gamma_at(*r.certificate, 0) == doctest::Approx(1).epsilon(1e-6));
    CHECK(gamma_at(*r.certificate, 1) == doctest::Approx(1).epsilon(1e-6));
    CHECK(r.certificate->Y.norm() <= 1e-6);
    CHECK(dual_objective(*r.certificate, 1) == doctest::Approx(2).epsilon(1e-6));
}

TEST_CASE("find_certificate fails for a suboptimal M") {
    // Feasible for Δ = 1 on the two-point data but trace 1 > 0.25.
    const MatrixXd m = diag({1, 0});
    const ConstraintSet z = single(2, 0);
    FindcertOptions options;
    options.max_iters = 5000;
    const FindcertResult r = find_certificate(m, ConstraintSet{{}, std::nullopt, 2}, fixed_space(m), options);
    CHECK_FALSE(r.converged);

    // 1.5x the optimal trace on the simplex base, still feasible.
    const MatrixXd big = diag({1, 1, 1});
    const ConstraintSet sz = build_constraints_full(generate_simplex_base(2, 3));
    const FindcertResult rs = find_certificate(big, ConstraintSet{{}, std::nullopt, 3}, fixed_space(big), options);
    CHECK_FALSE(rs.converged);
    (void)z;
    (void)sz;
}

TEST_CASE("certify examples") {
    const LabeledDataset ds = two_point();
    const CertificateReport ok = certify(ds, diag({1, 0}), 2);
    CHECK(ok.verdict == Verdict::certified);
    CHECK(ok.gap <= 1e-6);
    CHECK(ok.gap == doctest::Approx(ok.primal_value - ok.dual_value));
    CHECK(ok.tight_set_size == 1);
    REQUIRE(ok.certificate);

    const CertificateReport loose = certify(ds, diag({1, 0}), 1);
    CHECK(loose.feasible);
    CHECK(loose.verdict == Verdict::failed);
    CHECK_FALSE(loose.certificate);

    const CertificateReport opt = certify(ds, diag({0.25, 0}), 1);
    CHECK(opt.verdict == Verdict::certified);

    // I is feasible but not optimal.
    const CertificateReport ident = certify(ds, MatrixXd::Identity(2, 2), 2);
    CHECK(ident.feasible);
    CHECK(ident.verdict == Verdict::failed);

    // The simplex base is Δ-fixed, so I restricted to its span is optimal; I itself is not.
    const LabeledDataset simplex = generate_simplex_base(2, 3);
    CHECK(certify(simplex, diag({1, 1, 0}), 1).verdict == Verdict::certified);
    CHECK(certify(simplex, MatrixXd::Identity(3, 3), 1).verdict == Verdict::failed);

    const CertificateReport infeasible = certify(ds, diag({0.5, 0}), 2);
    CHECK_FALSE(infeasible.feasible);
    CHECK(infeasible.verdict == Verdict::failed);
    REQUIRE(infeasible.violating_pair);
    CHECK(*infeasible.violating_pair == std::pair<Index, Index>{0, 1});

    CHECK_THROWS_AS(certify(ds, diag({1.5, 0}), 2), InvalidInput);
    CHECK_THROWS_AS(certify(ds, MatrixXd::Identity(3, 3), 2), InvalidInput);

    CertifyOptions with_bound;
    with_bound.dual_bound = 0.995;
    CHECK(certify(ds, MatrixXd::Identity(2, 2), 2, with_bound).verdict == Verdict::failed);
    with_bound.dual_bound = 0.995;
    const CertificateReport gap_only = certify(ds, diag({1, 0.005}), 2, with_bound);
    CHECK(gap_only.verdict == Verdict::gap_only);
}

TEST_CASE("certify the 0+ variant") {
    CertifyOptions options;
    options.zero_plus = true;
    // z = (2,0): optimum z z^T / |z|^4 = diag(1/4, 0).
    const CertificateReport r = certify(two_point(), diag({0.25, 0}), 123, options);
    CHECK(r.verdict == Verdict::certified);
    CHECK(r.primal_value == doctest::Approx(0.25));
    REQUIRE(r.certificate);
    CHECK(r.certificate->Y.norm() <= 1e-7);
}

TEST_CASE("count_tight_vs_bound") {
    const ConstraintSet z = single(2, 0);
    CHECK(count_tight_vs_bound(diag({1, 0}), z, 2, 4).bound == 121);
    CHECK(count_tight_vs_bound(diag({1, 0}), z, 2, 2).bound == 16);
    const TightCount c = count_tight_vs_bound(diag({1, 0}), z, 2, 2);
    CHECK(c.count == 1);
    CHECK_FALSE(c.exceeds);
}

TEST_CASE("weak duality for random feasible pairs") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = uniform_index(rng, 1, 5);
        const LabeledDataset ds = random_dataset(uniform_index(rng, 2, 10), d, 2, rng);
        const ConstraintSet z = build_constraints_full(ds);
        const MatrixXd m = random_feasible(d, rng);
        const double delta = std::sqrt(quadratic_forms(m, z.matrix()).minCoeff());
        if (!(delta > 0)) continue;

        DualCertificate cert;
        cert.constraints = z;
        for (Index k = 0; k < z.size(); ++k)
            if (uniform_real(rng, 0, 1) < 0.5) cert.gamma.emplace_back(k, uniform_real(rng, 0, 1));
        const MatrixXd g = gaussian_matrix(d, d, rng);
        cert.Y = g * g.transpose() * uniform_real(rng, 0, 0.5);
        const double top = eig_sym(cert.weighted_gram()).values(0);
        if (top > 1)
            for (auto& entry : cert.gamma) entry.second /= top;
        REQUIRE(dual_feasibility(cert).max() <= 1e-9);
        CHECK(dual_objective(cert, delta) <= m.trace() + 1e-6 * std::max(1.0, m.trace()));
    }
}

TEST_CASE("contact span certificate on constructed Δ-fixed instances") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        PlantedModel model;
        model.r = 1 + static_cast<Index>(seed % 3);
        model.d = model.r + 1 + static_cast<Index>(seed % 4);
        model.base = seed % 2 ? BaseKind::cube : BaseKind::simplex;
        model.a = model.base == BaseKind::cube ? (Index(1) << model.r) : model.r + 1;
        model.b = 1;
        model.delta = 0.5 + 0.25 * static_cast<double>(seed % 3);
        const PlantedSample s = generate_planted(model, seed);
        const ConstraintSet contacts = contact_vectors(build_constraints_full(s.data));
        const DualCertificate cert = contact_span_certificate(contacts, s.pi);
        const DualFeasibility f = dual_feasibility(cert);
        CHECK(f.max() <= 1e-7);
        for (const auto& [k, v] : cert.gamma) CHECK(v >= 0);
        CHECK(dual_objective(cert, model.delta) == doctest::Approx(static_cast<double>(model.r)).epsilon(1e-9));
        CHECK(findcert_residuals(cert, s.pi, fixed_space(s.pi)).max() <= 1e-7);
    }
}

TEST_CASE("certificates from certify satisfy slackness and weak duality") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const SqueezeInstance inst = squeeze_instance(derive_seed(101, seed));
        const CertifiedSolution sol = certified_solve(inst.data, inst.delta);
        if (!sol.report.certificate) continue;
        const DualCertificate& cert = *sol.report.certificate;
        const MatrixXd m = snap_spectrum(sol.M, 1e-9);
        CHECK(cert.constraints.size() == sol.report.tight_set_size);
        for (const auto& p : cert.constraints.pairs) {
            const double len = std::sqrt(quadratic_forms(m, p.z.transpose()).value());
            CHECK(len <= inst.delta * (1 + 1e-4));
        }
        CHECK(findcert_residuals(cert, m, fixed_space(m)).col_y <= 1e-6);
        CHECK(sol.report.dual_value <= sol.report.primal_value + 1e-6 * std::max(1.0, sol.report.primal_value));
    }
}

TEST_CASE("converged find_certificate output meets every residual") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SqueezeInstance inst = squeeze_instance(derive_seed(202, seed));
        SqueezeConfig config;
        config.delta = inst.delta;
        const MatrixXd m = snap_spectrum(solve_hard(build_constraints_full(inst.data), config).M, 1e-9);
        const ConstraintSet z = build_constraints_full(inst.data);
        ConstraintSet tight;
        tight.dim = z.dim;
        for (Index k : tight_constraints(m, z, inst.delta, 1e-5)) tight.pairs.push_back(z.pairs[static_cast<std::size_t>(k)]);
        const FindcertResult r = find_certificate(m, tight, fixed_space(m));
        if (!r.converged) continue;
        CHECK(r.residuals.max() <= 1e-7);
        CHECK(findcert_residuals(*r.certificate, m, fixed_space(m)).col_y <= 1e-7);
        for (const auto& [k, v] : r.certificate->gamma) CHECK(k < tight.size());
    }
}

TEST_CASE("certify feasibility is monotone in Δ") {
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const Index d = uniform_index(rng, 1, 4);
        const LabeledDataset ds = random_dataset(uniform_index(rng, 2, 12), d, 2, rng);
        const MatrixXd m = random_feasible(d, rng);
        const double delta = uniform_real(rng, 0.1, 2);
        const CertificateReport r = certify(ds, m, delta);
        if (!r.feasible) continue;
        CHECK(certify(ds, m, delta * uniform_real(rng, 0.1, 1)).feasible);
    }
}
