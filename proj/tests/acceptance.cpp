// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status is 1
// when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "squeezefit/analysis.hpp"
#include "squeezefit/baselines.hpp"
#include "squeezefit/constraints.hpp"
#include "squeezefit/duality.hpp"
#include "squeezefit/errors.hpp"
#include "squeezefit/generators.hpp"
#include "squeezefit/io.hpp"
#include "squeezefit/kdtree.hpp"
#include "squeezefit/solver.hpp"
#include "support.hpp"

using namespace sqz;
using namespace sqz::testing;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip };

struct Result {
    Outcome outcome = Outcome::fail;
    std::string detail;
};

int failures = 0;

void report(int number, const std::string& title, double budget_s, const std::function<Result()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Result v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {Outcome::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (v.outcome == Outcome::pass && secs > budget_s) {
        v.outcome = Outcome::fail;
        v.detail += "; over the " + std::to_string(static_cast<int>(budget_s)) + " s budget";
    }
    const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
    if (v.outcome == Outcome::fail) ++failures;
    std::cout << tag << "  criterion " << std::setw(2) << number << "  " << title << "  [" << v.detail << "; "
              << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::endl;
}

std::string fmt(double x, int precision = 3) {
    std::ostringstream out;
    out << std::setprecision(precision) << x;
    return out.str();
}

Result verdict(bool ok, const std::string& detail) { return {ok ? Outcome::pass : Outcome::fail, detail}; }

// Every certificate produced in this run, for the weak duality sweep.
struct Recorded {
    std::string source;
    double primal = 0;
    double dual = 0;
    double recomputed_dual = 0;
};
std::vector<Recorded> registry;

void record(const std::string& source, const CertificateReport& r, double delta) {
    if (!r.certificate) return;
    registry.push_back({source, r.primal_value, r.dual_value, dual_objective(*r.certificate, delta)});
}

CertifiedSolution recorded_solve(const std::string& source, const LabeledDataset& ds, double delta) {
    CertifiedSolution out = certified_solve(ds, delta);
    record(source, out.report, delta);
    return out;
}

MatrixXd diag_ones(Index d, Index r) {
    MatrixXd m = MatrixXd::Zero(d, d);
    m.topLeftCorner(r, r).setIdentity();
    return m;
}

/// Exhaustive search over 2x2 matrices in [0, I] with entries on a 0.01 grid.
double grid_min_trace(const ConstraintSet& z, double delta) {
    double best = std::numeric_limits<double>::infinity();
    for (int ia = 0; ia <= 100; ++ia)
        for (int ic = 0; ic <= 100; ++ic) {
            const double a = ia * 0.01, c = ic * 0.01;
            if (a + c >= best) continue;
            for (int ib = -100; ib <= 100; ++ib) {
                const double b = ib * 0.01;
                if (a * c - b * b < -1e-12 || (1 - a) * (1 - c) - b * b < -1e-12) continue;
                bool ok = true;
                for (const auto& p : z.pairs)
                    ok = ok && a * p.z(0) * p.z(0) + 2 * b * p.z(0) * p.z(1) + c * p.z(1) * p.z(1) >= delta * delta - 1e-12;
                if (ok) best = a + c;
            }
        }
    return best;
}

Result criterion1() {
    MatrixXd x(2, 2);
    x << 1, 0, -1, 0;
    const LabeledDataset ds(x, {0, 1});
    const ConstraintSet z = build_constraints_full(ds);
    SqueezeConfig config;
    config.delta = 2;
    const SqueezeResult r2 = solve_hard(z, config);
    MatrixXd target = MatrixXd::Zero(2, 2);
    target(0, 0) = 1;
    const double err2 = (r2.M - target).norm();
    const CertificateReport c2 = certify(ds, r2.M, 2);
    record("two-point delta=2", c2, 2);

    config.delta = 1;
    const SqueezeResult r1 = solve_hard(z, config);
    const CertificateReport c1 = certify(ds, r1.M, 1);
    record("two-point delta=1", c1, 1);

    const double grid2 = grid_min_trace(z, 2), grid1 = grid_min_trace(z, 1);
    const bool ok = err2 <= 1e-2 && c2.verdict == Verdict::certified && c2.gap <= 1e-3 &&
                    std::abs(r1.objective - 0.25) <= 1e-3 && std::abs(grid2 - 1) < 1e-9 && std::abs(grid1 - 0.25) < 1e-9 &&
                    std::abs(r2.objective - grid2) <= 1e-2 && std::abs(r1.objective - grid1) <= 1e-2;
    return verdict(ok, "|M-diag(1,0)|=" + fmt(err2) + ", gap=" + fmt(c2.gap) + ", tr(delta=1)=" + fmt(r1.objective, 7) +
                           ", grid optima " + fmt(grid2) + "/" + fmt(grid1));
}

Result criterion2() {
    const Index r = 4, d = 8;
    const LabeledDataset ds = generate_simplex_base(r, d);
    const ConstraintSet z = build_constraints_full(ds);
    SqueezeConfig config;
    config.delta = 1;
    const SqueezeResult res = solve_hard(z, config);
    const double err = (res.M - diag_ones(d, r)).norm();

    // γ(±e_i) = 1/2 in the signed convention: 1 per stored representative.
    DualCertificate cert;
    cert.constraints = z;
    cert.Y = MatrixXd::Zero(d, d);
    bool contacts_ok = true;
    const ConstraintSet contacts = contact_vectors(z);
    std::set<Index> axes;
    for (const auto& p : contacts.pairs) {
        Index arg = 0;
        p.z.cwiseAbs().maxCoeff(&arg);
        contacts_ok = contacts_ok && std::abs(p.z.norm() - 1) <= 1e-6 && std::abs(std::abs(p.z(arg)) - 1) <= 1e-12 && arg < r;
        axes.insert(arg);
    }
    contacts_ok = contacts_ok && contacts.size() == r && static_cast<Index>(axes.size()) == r;
    for (Index k = 0; k < z.size(); ++k)
        if (std::abs(z.pairs[static_cast<std::size_t>(k)].z.norm() - 1) <= 1e-12) cert.gamma.emplace_back(k, 1.0);
    const double primal = res.M.trace();
    const double dual = dual_objective(cert, 1);
    const double resid = findcert_residuals(cert, diag_ones(d, r), fixed_space(diag_ones(d, r))).max();
    const double gap = primal - dual;

    const CertificateReport rep = certify(ds, res.M, 1);
    record("simplex r=4 d=8", rep, 1);
    registry.push_back({"simplex constructed certificate", primal, dual, dual});

    const bool ok = err <= 1e-2 && std::abs(gap) <= 1e-3 && resid <= 1e-7 && contacts_ok &&
                    rep.verdict == Verdict::certified;
    return verdict(ok, "|M-Pi|=" + fmt(err) + ", constructed gap=" + fmt(gap) + ", residual=" + fmt(resid) +
                           ", contacts=" + std::to_string(contacts.size()) + (contacts_ok ? " (+-e_i, length 1)" : " (wrong)") +
                           ", certify " + to_string(rep.verdict));
}

struct SqueezeRun {
    bool first_certified = false;
    bool holds = false;
    double projection_error = 0;
    bool squeezed_fixed = false;
    double squeezed_shortest = 0;
    double delta = 0;
    std::string note;
};

std::vector<SqueezeRun> squeeze_runs;
int squeeze_seeds_tried = 0;

CertifiedSolver recording_solver(const std::string& source) {
    return [source](const LabeledDataset& ds, double delta) { return recorded_solve(source, ds, delta); };
}

Result criterion3() {
    const auto solver = recording_solver("squeeze-once");
    while (static_cast<int>(squeeze_runs.size()) < 50 && squeeze_seeds_tried < 200) {
        const SqueezeInstance inst = squeeze_instance(derive_seed(2024, static_cast<std::uint64_t>(squeeze_seeds_tried++)));
        const CertifiedSolution first = solver(inst.data, inst.delta);
        if (!first.certified) continue;
        SqueezeRun run;
        run.first_certified = true;
        run.delta = inst.delta;
        // Reuse the certified first solve.
        const CertifiedSolver replay = [&](const LabeledDataset& ds, double delta) {
            if (&ds == &inst.data) return first;
            return solver(ds, delta);
        };
        try {
            const SqueezeOnceReport rep = squeeze_once_check(inst.data, inst.delta, replay);
            run.holds = rep.projection_error <= 1e-2;
            run.projection_error = rep.projection_error;
            const LabeledDataset squeezed = inst.data.transformed(psd_sqrt(rep.M));
            run.squeezed_shortest = cross_class_shortest(squeezed, MatrixXd::Identity(squeezed.dim(), squeezed.dim())).min_length;
            run.squeezed_fixed = is_delta_fixed(squeezed, std::min(inst.delta, run.squeezed_shortest), solver).fixed;
        } catch (const Inconclusive& e) {
            run.note = e.what();
        }
        squeeze_runs.push_back(run);
    }
    int holds = 0;
    double worst = 0;
    for (const auto& r : squeeze_runs) {
        holds += r.holds;
        worst = std::max(worst, r.projection_error);
    }
    const int skipped = squeeze_seeds_tried - static_cast<int>(squeeze_runs.size());
    return verdict(squeeze_runs.size() == 50 && holds == 50,
                   std::to_string(holds) + "/" + std::to_string(squeeze_runs.size()) + " hold, worst |N-P|=" + fmt(worst) +
                       ", " + std::to_string(skipped) + " uncertified seeds skipped");
}

Result criterion4() {
    // The squeezed data of every criterion 3 instance, plus the original data.
    const auto solver = recording_solver("contact length");
    int fixed = 0, ok = 0;
    double worst = 0;
    for (const auto& run : squeeze_runs) {
        if (!run.squeezed_fixed) continue;
        ++fixed;
        const double rel = std::abs(run.squeezed_shortest - run.delta) / run.delta;
        worst = std::max(worst, rel);
        ok += rel <= 1e-6;
    }
    int original_fixed = 0, original_ok = 0;
    for (int s = 0; s < squeeze_seeds_tried; ++s) {
        const SqueezeInstance inst = squeeze_instance(derive_seed(2024, static_cast<std::uint64_t>(s)));
        DeltaFixedResult r;
        try {
            r = is_delta_fixed(inst.data, inst.delta, solver);
        } catch (const Inconclusive&) {
            continue;
        }
        if (!r.fixed) continue;
        ++original_fixed;
        const double rel = std::abs(min_cross_distance(inst.data) - inst.delta) / inst.delta;
        worst = std::max(worst, rel);
        original_ok += rel <= 1e-6;
    }
    return verdict(fixed > 0 && ok == fixed && original_ok == original_fixed,
                   std::to_string(ok) + "/" + std::to_string(fixed) + " squeezed and " + std::to_string(original_ok) + "/" +
                       std::to_string(original_fixed) + " original delta-fixed instances at length delta, worst rel " +
                       fmt(worst));
}

Result criterion5() {
    PlantedModel model;
    model.d = 20;
    model.r = 3;
    model.a = 8;
    model.b = 60;
    model.base = BaseKind::cube;
    model.delta = 1;
    const double lambda = lambda_min_nonzero(contact_vectors(build_constraints_full(planted_base(model))));
    auto successes_at = [&](double level) {
        model.sigma = std::sqrt(lambda / (2.0 * static_cast<double>(model.r) * level));
        int wins = 0;
        for (int t = 0; t < 20; ++t) {
            const PlantedSample s = generate_planted(model, derive_seed(55, static_cast<std::uint64_t>(t)));
            SqueezeConfig config;
            config.delta = model.delta;
            const SqueezeResult res = solve_hard(build_constraints_full(s.data), config);
            wins += recovery_report(res.M, s.pi).frobenius <= 0.05;
        }
        return wins;
    };
    const int high = successes_at(20);
    const int low = successes_at(0.05);
    return verdict(high >= 18 && low <= 4, "SNR 20: " + std::to_string(high) + "/20 recovered, SNR 0.05: " +
                                               std::to_string(low) + "/20 recovered (lambda=" + fmt(lambda) + ")");
}

Result criterion6() {
    std::vector<double> ours, theirs;
    const Figure1Params params;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const PlantedSample s = generate_figure1(seed, params);
        SqueezeConfig config;
        config.delta = params.margin;
        const SqueezeResult res = solve_hard(build_constraints_full(s.data), config);
        ours.push_back(recovery_report(res.M, s.pi).angle_deg);
        theirs.push_back(projection_distance(pca(s.data, 1), s.pi).max_principal_angle_deg);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return (v[9] + v[10]) / 2;
    };
    const double a = median(ours), b = median(theirs);
    return verdict(a <= 15 && b > 45, "median angle SqueezeFit " + fmt(a) + " deg, PCA " + fmt(b) + " deg");
}

Result criterion7() {
    Index worst = 0;
    bool ok = true;
    for (std::uint64_t t = 0; t < 20; ++t) {
        Rng rng(derive_seed(77, t));
        const LabeledDataset ds = random_dataset(40, 4, 2, rng);
        const ConstraintSet z = build_constraints_full(ds);
        SqueezeConfig config;
        config.delta = 0.8 * min_cross_distance(ds);
        const SqueezeResult res = solve_hard(z, config);
        const TightCount c = count_tight_vs_bound(res.M, z, config.delta, 4);
        worst = std::max(worst, c.count);
        ok = ok && c.bound == 121 && c.count < c.bound;
    }
    return verdict(ok, "largest tight set " + std::to_string(worst) + " < 121");
}

Result criterion8() {
    const StatDimEstimate orth = estimate_stat_dim(ConeSpec::orthant(32), 10000, 8);
    const StatDimEstimate cone = estimate_stat_dim(ConeSpec::paper_cone(64), 10000, 9);
    const bool ok = std::abs(orth.estimate - 16) <= 4 * orth.stderr_ && cone.estimate > 0 &&
                    cone.estimate <= 32 + 4 * cone.stderr_ && cone.reliable;
    return verdict(ok, "orthant(32) " + fmt(orth.estimate, 4) + " +- " + fmt(orth.stderr_, 2) + ", paper_cone(64) " +
                           fmt(cone.estimate, 4) + " +- " + fmt(cone.stderr_, 2));
}

Result criterion9() {
    int violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : registry) {
        const double slack = std::max(r.dual, r.recomputed_dual) - r.primal;
        worst = std::max(worst, slack / std::max(1.0, r.primal));
        violations += slack > 1e-6 * std::max(1.0, r.primal);
    }
    return verdict(!registry.empty() && violations == 0,
                   std::to_string(registry.size()) + " certificates, " + std::to_string(violations) +
                       " violations, max (dual-primal)/max(1,primal)=" + fmt(worst));
}

int run_quiet(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Result criterion10() {
    fs::path dir = "data";
    if (const char* env = std::getenv("SQZ_DATA_DIR")) dir = env;
    for (const char* f : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                          "t10k-labels-idx1-ubyte"})
        if (!fs::exists(dir / f))
            return {Outcome::skip, "MNIST files not found in " + fs::absolute(dir).string() +
                                       "; set SQZ_DATA_DIR to run the desk-scale reproduction"};
    const fs::path out = fs::temp_directory_path() / "sqz_acceptance_mnist";
    const std::string cmd = std::string(SQZ_BINARY) + " compare --data-dir " + dir.string() +
                            " --methods id,squeezefit --K 1,5 --out " + out.string() + " > /dev/null";
    if (run_quiet(cmd) != 0) return {Outcome::fail, "sqz compare failed"};
    double ours = -1, id5 = -1;
    for (const auto& cell : read_json(out / "results.json")["table"]) {
        if (cell["method"] == "squeezefit" && cell["K"] == 1) ours = cell["error_pct"];
        if (cell["method"] == "id" && cell["K"] == 5) id5 = cell["error_pct"];
    }
    return verdict(ours >= 0 && ours <= 9 && std::abs(id5 - 1.95) <= 1,
                   "SqueezeFit K=1 " + fmt(ours) + "%, Id K=5 " + fmt(id5) + "%");
}

Result criterion11() {
    int tree_ok = 0, shortest_ok = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        Rng rng(derive_seed(1111, t));
        const Index d = uniform_index(rng, 1, 6);
        const Index n = uniform_index(rng, 2, 512);
        const MatrixXd pts = t % 2 ? random_grid_dataset(n, d, 2, rng).points() : gaussian_matrix(n, d, rng);
        const KdTree tree(pts);
        bool same = true;
        for (int q = 0; q < 20; ++q) {
            const VectorXd query = gaussian_matrix(d, 1, rng) * 2;
            const Index k = uniform_index(rng, 1, std::min<Index>(n, 10));
            same = same && tree.knn(query, k) == linear_knn(pts, query, k);
        }
        tree_ok += same;

        const LabeledDataset ds =
            t % 2 ? random_grid_dataset(n, d, 3, rng) : random_dataset(n, d, static_cast<int>(uniform_index(rng, 2, 4)), rng);
        const MatrixXd m = t % 3 ? random_feasible(d, rng) : MatrixXd::Identity(d, d);
        const auto fast = cross_class_shortest(ds, m);
        const auto scan = cross_class_shortest_scan(ds, m);
        shortest_ok += fast.min_length == scan.min_length && fast.pairs == scan.pairs;
    }
    return verdict(tree_ok == 100 && shortest_ok == 100, "KdTree " + std::to_string(tree_ok) +
                                                             "/100, cross_class_shortest " + std::to_string(shortest_ok) +
                                                             "/100 identical to linear scan");
}

} // namespace

int main() {
    report(1, "two-point analytic instances", 5, criterion1);
    report(2, "simplex instance r=4, d=8", 10, criterion2);
    report(3, "squeeze-once on 50 certified random instances", 120, criterion3);
    report(4, "contact length on delta-fixed instances", 120, criterion4);
    report(5, "planted recovery at SNR 20 and 0.05", 600, criterion5);
    report(6, "figure1 preset: SqueezeFit vs PCA angles", 120, criterion6);
    report(7, "tight-set size below (C(5,2)+1)^2 for d=4", 120, criterion7);
    report(8, "statistical dimension estimates", 120, criterion8);
    report(9, "weak duality over every certificate of this run", 60, criterion9);
    report(10, "desk-scale MNIST 4-vs-9", 900, criterion10);
    report(11, "k-d tree and shortest-pair oracles", 60, criterion11);
    return failures == 0 ? 0 : 1;
}
