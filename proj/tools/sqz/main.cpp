// sqz: command-line front end for SqueezeFit.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "common.hpp"
#include "svg.hpp"

#include "squeezefit/analysis.hpp"
#include "squeezefit/baselines.hpp"
#include "squeezefit/constraints.hpp"
#include "squeezefit/dataset.hpp"
#include "squeezefit/duality.hpp"
#include "squeezefit/generators.hpp"
#include "squeezefit/io.hpp"
#include "squeezefit/random.hpp"
#include "squeezefit/solver.hpp"
#include "squeezefit/spectral.hpp"

namespace fs = std::filesystem;
using namespace sqz;
using namespace sqz::cli;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Wall-clock times live apart from results.json so the record itself is
// byte-identical across runs with the same seed.
void write_timings(const fs::path& dir, const Json& timings) { write_json(timings, dir / "timings.json"); }

struct Command {
    CLI::App* app = nullptr;
    Options opts{nullptr};
    Common common;

    virtual ~Command() = default;
    virtual std::string name() const = 0;
    virtual int run() = 0;

    void attach(CLI::App* sub) {
        app = sub;
        opts = Options(sub);
        common.attach(sub, opts);
    }
    void load_config() {
        if (!common.config.empty()) opts.apply_config(read_json(common.config), name());
    }
};

LabeledDataset read_dataset(const std::string& path, bool header) {
    CsvOptions options;
    options.skip_header = header;
    return load_csv(path, options);
}

// ---------------------------------------------------------------- gen

struct GenCommand : Command {
    std::string kind = "planted";
    Index d = 20, r = 3, a = 8, b = 60;
    std::string base = "cube";
    double sigma = 0.1, delta = 1.0;

    std::string name() const override { return "gen"; }

    void setup(CLI::App* sub) {
        attach(sub);
        opts.add("--kind", "kind", kind, "two-point, simplex, cube, planted or figure1")
            ->check(CLI::IsMember({"two-point", "simplex", "cube", "planted", "figure1"}));
        opts.add("--d", "d", d, "Ambient dimension");
        opts.add("--r", "r", r, "Planted dimension");
        opts.add("--a", "a", a, "Base points");
        opts.add("--b", "b", b, "Copies per base point");
        opts.add("--base", "base", base, "Planted base: simplex or cube")->check(CLI::IsMember({"simplex", "cube"}));
        opts.add("--sigma", "sigma", sigma, "Noise standard deviation");
        opts.add("--delta", "delta", delta, "Contact length of the base");
    }

    int run() override {
        const fs::path dir = common.dir();
        Json record = result_record(name(), common.seed, opts.echo());
        if (kind == "two-point") {
            MatrixXd pts(2, 2);
            pts << -1, 0, 1, 0;
            save_csv(LabeledDataset(pts, {0, 1}), dir / "data.csv");
        } else if (kind == "simplex") {
            save_csv(generate_simplex_base(r, d), dir / "data.csv");
        } else if (kind == "cube") {
            save_csv(generate_cube_base(r), dir / "data.csv");
        } else {
            PlantedSample sample;
            if (kind == "figure1") {
                sample = generate_figure1(common.seed);
            } else {
                PlantedModel model;
                model.d = d;
                model.r = r;
                model.a = a;
                model.b = b;
                model.base = base == "cube" ? BaseKind::cube : BaseKind::simplex;
                model.sigma = sigma;
                model.delta = delta;
                sample = generate_planted(model, common.seed);
            }
            save_csv(sample.data, dir / "data.csv");
            save_matrix(sample.pi, dir / "pi.json");
        }
        write_json(record, dir / "results.json");
        std::cout << "wrote " << (dir / "data.csv").string() << "\n";
        return ok;
    }
};

// ---------------------------------------------------------------- solve

struct SolveCommand : Command {
    std::string data;
    bool header = false;
    double delta = 1.0;
    std::string mode = "hard";
    double lambda = 1.0;
    Index s = 0;
    int max_iters = 20000;
    double tol_obj = 1e-6, tol_feas = 1e-6;
    bool certify_flag = false;

    std::string name() const override { return "solve"; }

    void setup(CLI::App* sub) {
        attach(sub);
        opts.add("--data", "data", data, "CSV dataset, label in the first column");
        opts.add_flag("--header", "header", header, "CSV has a header row");
        opts.add("--delta", "delta", delta, "Separation Δ");
        opts.add("--mode", "mode", mode, "hard, hinge, zero_plus or hinge_zero_plus")
            ->check(CLI::IsMember({"hard", "hinge", "zero_plus", "hinge_zero_plus"}));
        opts.add("--lambda", "lambda", lambda, "Hinge weight λ");
        opts.add("--s", "s", s, "Keep only the s nearest cross-class neighbors per point (0 = all pairs)");
        opts.add("--max-iters", "max_iters", max_iters, "Iteration cap");
        opts.add("--tol-obj", "tol_obj", tol_obj, "Objective tolerance");
        opts.add("--tol-feas", "tol_feas", tol_feas, "Feasibility tolerance");
        opts.add_flag("--certify", "certify", certify_flag, "Certify the result (hard and zero_plus modes)");
    }

    int run() override {
        if (data.empty()) throw InvalidInput("solve: --data is required");
        const LabeledDataset ds = read_dataset(data, header);
        SqueezeConfig config;
        config.mode = parse_mode(mode);
        config.delta = delta;
        config.lambda = lambda;
        config.max_iters = max_iters;
        config.tol_obj = tol_obj;
        config.tol_feas = tol_feas;
        config.seed = common.seed;
        if (relaxes_identity(config.mode) && opts.given("delta"))
            std::cerr << "warning: --delta is ignored in " << mode << " mode (Δ = 1)\n";

        const auto t0 = Clock::now();
        const ConstraintSet z = s > 0 ? build_constraints_nn(ds, s) : build_constraints_full(ds);
        SqueezeResult result;
        try {
            result = solve(z, config);
        } catch (const Infeasible& e) {
            std::cerr << "infeasible: " << e.what() << "\n";
            return infeasible;
        }
        const double solve_seconds = seconds_since(t0);

        const fs::path dir = common.dir();
        save_matrix(result.M, dir / "M.json");
        Json record = result_record(name(), common.seed, opts.echo());
        record["result"] = result_to_json(result, config);
        record["constraints"] = z.size();
        record["rank_0.5"] = rank_round(result.M, 0.5).rank;

        int code = ok;
        Json timings{{"solve_seconds", solve_seconds}};
        if (certify_flag) {
            if (is_hinge(config.mode)) {
                std::cerr << "warning: --certify applies to the constrained modes only; skipped\n";
            } else {
                CertifyOptions copts;
                copts.zero_plus = relaxes_identity(config.mode);
                copts.tol_feas = tol_feas;
                copts.dual_bound = result.lower_bound;
                const auto t1 = Clock::now();
                const CertificateReport report = certify(ds, result.M, config.effective_delta(), copts);
                timings["certify_seconds"] = seconds_since(t1);
                write_json(report_to_json(report, config.effective_delta()), dir / "certificate.json");
                record["verdict"] = to_string(report.verdict);
                record["gap"] = report.gap;
                if (report.verdict != Verdict::certified) code = verification_failed;
            }
        }
        write_json(record, dir / "results.json");
        write_timings(dir, timings);

        std::cout << std::setprecision(10) << "mode " << mode << "  tr M = " << result.objective
                  << "  worst violation = " << result.worst_violation << "  iterations = " << result.iterations
                  << (result.converged ? "" : " (not converged)") << "\n";
        if (record.contains("verdict")) std::cout << "verdict " << record["verdict"].get<std::string>() << "\n";
        return code;
    }
};

// ---------------------------------------------------------------- certify

struct CertifyCommand : Command {
    std::string data, matrix;
    bool header = false, zero_plus = false;
    double delta = 1.0, tol_feas = 1e-6;

    std::string name() const override { return "certify"; }

    void setup(CLI::App* sub) {
        attach(sub);
        opts.add("--data", "data", data, "CSV dataset, label in the first column");
        opts.add("--matrix", "matrix", matrix, "Candidate M as JSON {dim, data}");
        opts.add_flag("--header", "header", header, "CSV has a header row");
        opts.add("--delta", "delta", delta, "Separation Δ");
        opts.add_flag("--zero-plus", "zero_plus", zero_plus, "Certify the 0+ variant (Δ = 1, no M <= I cap)");
        opts.add("--tol-feas", "tol_feas", tol_feas, "Feasibility tolerance");
    }

    int run() override {
        if (data.empty() || matrix.empty()) throw InvalidInput("certify: --data and --matrix are required");
        const LabeledDataset ds = read_dataset(data, header);
        const MatrixXd m = load_matrix(matrix);
        CertifyOptions copts;
        copts.zero_plus = zero_plus;
        copts.tol_feas = tol_feas;
        const double d_eff = zero_plus ? 1.0 : delta;
        const auto t0 = Clock::now();
        const CertificateReport report = certify(ds, m, d_eff, copts);

        const fs::path dir = common.dir();
        write_json(report_to_json(report, d_eff), dir / "certificate.json");
        Json record = result_record(name(), common.seed, opts.echo());
        record["verdict"] = to_string(report.verdict);
        record["gap"] = report.gap;
        write_json(record, dir / "results.json");
        write_timings(dir, Json{{"certify_seconds", seconds_since(t0)}});

        std::cout << std::setprecision(10) << "verdict:      " << to_string(report.verdict) << "\n"
                  << "feasible:     " << (report.feasible ? "yes" : "no") << "\n"
                  << "primal tr M:  " << report.primal_value << "\n"
                  << "dual value:   " << report.dual_value << "\n"
                  << "gap:          " << report.gap << "\n"
                  << "min length:   " << report.min_length << "\n"
                  << "tight pairs:  " << report.tight_set_size << "\n";
        for (const auto& [k, v] : report.residuals) std::cout << "  " << std::left << std::setw(18) << k << v << "\n";
        if (report.violating_pair)
            std::cout << "violating pair: (" << report.violating_pair->first << ", " << report.violating_pair->second
                      << ")\n";
        std::cout << report.message << "\n";
        return report.verdict == Verdict::certified ? ok : verification_failed;
    }
};

// ---------------------------------------------------------------- recover

struct RecoverCommand : Command {
    std::string preset = "planted";
    Index d = 20, r = 3, a = 8, b = 60;
    std::string base = "cube";
    double delta = 1.0;
    double sigma = -1;
    std::vector<double> snr_levels{20.0};
    int trials = 20;
    double success_threshold = 0.05;

    std::string name() const override { return "recover"; }

    void setup(CLI::App* sub) {
        attach(sub);
        opts.add("--preset", "preset", preset, "planted or figure1")->check(CLI::IsMember({"planted", "figure1"}));
        opts.add("--d", "d", d, "Ambient dimension");
        opts.add("--r", "r", r, "Planted dimension");
        opts.add("--a", "a", a, "Base points");
        opts.add("--b", "b", b, "Copies per base point");
        opts.add("--base", "base", base, "simplex or cube")->check(CLI::IsMember({"simplex", "cube"}));
        opts.add("--delta", "delta", delta, "Contact length Δ");
        opts.add("--sigma", "sigma", sigma, "Noise standard deviation; negative means use --snr");
        opts.add("--snr", "snr", snr_levels, "SNR level(s); several values give a sweep")->delimiter(',');
        opts.add("--trials", "trials", trials, "Trials per level")->check(CLI::PositiveNumber);
        opts.add("--success-threshold", "success_threshold", success_threshold, "Frobenius error counted as success");
    }

    int run() override { return preset == "figure1" ? run_figure1() : run_planted(); }

    int run_planted() {
        PlantedModel model;
        model.d = d;
        model.r = r;
        model.a = a;
        model.b = b;
        model.base = base == "cube" ? BaseKind::cube : BaseKind::simplex;
        model.delta = delta;
        model.validate();
        const LabeledDataset scaled = planted_base(model);
        const double lambda = lambda_min_nonzero(contact_vectors(build_constraints_full(scaled)));

        std::vector<double> sigmas;
        if (sigma >= 0) sigmas.push_back(sigma);
        else
            for (double level : snr_levels) sigmas.push_back(std::sqrt(lambda / (2.0 * static_cast<double>(r) * level)));

        struct Trial {
            RecoveryReport report;
            double objective = 0;
            bool converged = false;
            std::uint64_t seed = 0;
        };
        const int levels = static_cast<int>(sigmas.size());
        std::vector<Trial> results(static_cast<std::size_t>(levels * trials));
        const auto t0 = Clock::now();
        parallel_for(levels * trials, common.threads, [&](int k) {
            PlantedModel m = model;
            m.sigma = sigmas[static_cast<std::size_t>(k / trials)];
            Trial& t = results[static_cast<std::size_t>(k)];
            t.seed = derive_seed(common.seed, static_cast<std::uint64_t>(k));
            const PlantedSample sample = generate_planted(m, t.seed);
            SqueezeConfig config;
            config.delta = delta;
            const SqueezeResult res = solve_hard(build_constraints_full(sample.data), config);
            t.report = recovery_report(res.M, sample.pi);
            t.objective = res.objective;
            t.converged = res.converged;
        });

        const fs::path dir = common.dir();
        std::ofstream table(dir / "table.csv");
        table << std::setprecision(17) << "level,trial,seed,sigma,snr,frobenius,angle_deg,rank,success,objective\n";
        Json record = result_record(name(), common.seed, opts.echo());
        record["lambda_min_nonzero"] = lambda;
        Json per_level = Json::array();
        plot::Series curve{"SqueezeFit", {}, {}, true};
        for (int l = 0; l < levels; ++l) {
            const double sg = sigmas[static_cast<std::size_t>(l)];
            const double level_snr = sg > 0 ? snr(lambda, r, sg * sg) : std::numeric_limits<double>::infinity();
            int successes = 0;
            std::vector<double> errors;
            Json trials_json = Json::array();
            for (int t = 0; t < trials; ++t) {
                const Trial& tr = results[static_cast<std::size_t>(l * trials + t)];
                const bool success = tr.report.frobenius <= success_threshold;
                successes += success;
                errors.push_back(tr.report.frobenius);
                table << l << ',' << t << ',' << tr.seed << ',' << sg << ',' << level_snr << ',' << tr.report.frobenius
                      << ',' << tr.report.angle_deg << ',' << tr.report.rank << ',' << success << ',' << tr.objective
                      << '\n';
                trials_json.push_back({{"seed", tr.seed},
                                       {"frobenius", tr.report.frobenius},
                                       {"angle_deg", tr.report.angle_deg},
                                       {"rank", tr.report.rank},
                                       {"rank_match", tr.report.rank_match},
                                       {"success", success},
                                       {"converged", tr.converged}});
            }
            const double rate = static_cast<double>(successes) / trials;
            per_level.push_back({{"sigma", sg},
                                 {"snr", std::isfinite(level_snr) ? Json(level_snr) : Json("inf")},
                                 {"successes", successes},
                                 {"success_rate", rate},
                                 {"median_frobenius", median(errors)},
                                 {"trials", trials_json}});
            if (std::isfinite(level_snr)) {
                curve.x.push_back(level_snr);
                curve.y.push_back(rate);
            }
            std::cout << std::setprecision(6) << "sigma " << sg << "  SNR " << level_snr << "  success " << successes
                      << "/" << trials << "\n";
        }
        record["levels"] = per_level;
        write_json(record, dir / "results.json");
        write_timings(dir, Json{{"total_seconds", seconds_since(t0)}});
        if (curve.x.size() > 1) {
            plot::Figure fig{"Planted recovery", "SNR", "success rate", true, {curve}};
            plot::write_svg(fig, dir / "recovery.svg");
        }
        return ok;
    }

    int run_figure1() {
        struct Trial {
            double sqz_angle = 0, pca_angle = 0;
            std::uint64_t seed = 0;
        };
        std::vector<Trial> results(static_cast<std::size_t>(trials));
        const Figure1Params params;
        const auto t0 = Clock::now();
        parallel_for(trials, common.threads, [&](int k) {
            Trial& t = results[static_cast<std::size_t>(k)];
            t.seed = derive_seed(common.seed, static_cast<std::uint64_t>(k));
            const PlantedSample sample = generate_figure1(t.seed, params);
            SqueezeConfig config;
            config.delta = params.margin;
            const SqueezeResult res = solve_hard(build_constraints_full(sample.data), config);
            t.sqz_angle = recovery_report(res.M, sample.pi).angle_deg;
            t.pca_angle = projection_distance(pca(sample.data, 1), sample.pi).max_principal_angle_deg;
        });

        const fs::path dir = common.dir();
        std::ofstream table(dir / "table.csv");
        table << std::setprecision(17) << "trial,seed,squeezefit_angle_deg,pca_angle_deg\n";
        std::vector<double> sqz_angles, pca_angles;
        plot::Series s1{"SqueezeFit", {}, {}, false}, s2{"PCA", {}, {}, false};
        for (int t = 0; t < trials; ++t) {
            const Trial& tr = results[static_cast<std::size_t>(t)];
            table << t << ',' << tr.seed << ',' << tr.sqz_angle << ',' << tr.pca_angle << '\n';
            sqz_angles.push_back(tr.sqz_angle);
            pca_angles.push_back(tr.pca_angle);
            s1.x.push_back(t);
            s1.y.push_back(tr.sqz_angle);
            s2.x.push_back(t);
            s2.y.push_back(tr.pca_angle);
        }
        Json record = result_record(name(), common.seed, opts.echo());
        record["median_angle_squeezefit_deg"] = median(sqz_angles);
        record["median_angle_pca_deg"] = median(pca_angles);
        write_json(record, dir / "results.json");
        write_timings(dir, Json{{"total_seconds", seconds_since(t0)}});
        plot::write_svg(plot::Figure{"Angle to the planted subspace", "trial", "degrees", false, {s1, s2}},
                        dir / "angles.svg");
        std::cout << std::setprecision(4) << "median angle: SqueezeFit " << median(sqz_angles) << " deg, PCA "
                  << median(pca_angles) << " deg\n";
        return ok;
    }
};

// ---------------------------------------------------------------- compare

const char* kMnistFiles[] = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                             "t10k-labels-idx1-ubyte"};

void print_mnist_instructions(const fs::path& dir) {
    std::cerr << "MNIST files not found in " << dir.string() << ".\n"
              << "Download the four IDX files (train-images-idx3-ubyte, train-labels-idx1-ubyte,\n"
              << "t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte), decompress them, and place them in\n"
              << "that directory, or point SQZ_DATA_DIR (or --data-dir) at their location.\n";
}

struct CompareCommand : Command {
    std::string train, test, data_dir;
    bool header = false;
    std::vector<int> digits{4, 9};
    Index resolution = 10;
    Index n = 50;
    Index s = 5;
    double lambda = 1.0;
    std::string mode = "hinge_zero_plus";
    double delta = 1.0;
    int max_iters = 20000;
    std::vector<Index> ks{1, 3, 5};
    std::vector<std::string> methods{"id", "pca", "lda", "squeezefit"};
    Index pca_rank = 0;
    std::string baseline_fit = "subsample";

    std::string name() const override { return "compare"; }

    void setup(CLI::App* sub) {
        attach(sub);
        opts.add("--train", "train", train, "Training CSV (instead of MNIST)");
        opts.add("--test", "test", test, "Test CSV (instead of MNIST)");
        opts.add_flag("--header", "header", header, "CSV files have a header row");
        opts.add("--data-dir", "data_dir", data_dir, "MNIST directory (default $SQZ_DATA_DIR, then ./data)");
        opts.add("--digits", "digits", digits, "MNIST digits to keep")->delimiter(',');
        opts.add("--resolution", "resolution", resolution, "Downsampled MNIST side length");
        opts.add("--n", "n", n, "Subsample size for fitting");
        opts.add("--s", "s", s, "Nearest cross-class neighbors per point (0 = all pairs)");
        opts.add("--lambda", "lambda", lambda, "Hinge weight λ");
        opts.add("--mode", "mode", mode, "SqueezeFit variant")
            ->check(CLI::IsMember({"hard", "hinge", "zero_plus", "hinge_zero_plus"}));
        opts.add("--delta", "delta", delta, "Δ for the capped variants");
        opts.add("--max-iters", "max_iters", max_iters, "Solver iteration cap");
        opts.add("--K", "K", ks, "Neighbor counts")->delimiter(',');
        opts.add("--methods", "methods", methods, "Subset of id,pca,lda,squeezefit")
            ->delimiter(',')
            ->check(CLI::IsMember({"id", "pca", "lda", "squeezefit"}));
        opts.add("--pca-rank", "pca_rank", pca_rank, "PCA rank (0 = SqueezeFit's rounded rank)");
        opts.add("--baseline-fit", "baseline_fit", baseline_fit, "Fit PCA/LDA on the subsample or the full train set")
            ->check(CLI::IsMember({"subsample", "full"}));
    }

    std::optional<std::pair<LabeledDataset, LabeledDataset>> load() {
        if (!train.empty() || !test.empty()) {
            if (train.empty() || test.empty()) throw InvalidInput("compare: --train and --test go together");
            return std::make_pair(read_dataset(train, header), read_dataset(test, header));
        }
        fs::path dir = data_dir;
        if (dir.empty()) {
            const char* env = std::getenv("SQZ_DATA_DIR");
            dir = env ? fs::path(env) : fs::path("data");
        }
        for (const char* f : kMnistFiles)
            if (!fs::exists(dir / f)) {
                print_mnist_instructions(dir);
                return std::nullopt;
            }
        const std::set<int> keep(digits.begin(), digits.end());
        auto tr = load_idx(dir / kMnistFiles[0], dir / kMnistFiles[1], keep);
        auto te = load_idx(dir / kMnistFiles[2], dir / kMnistFiles[3], keep);
        if (resolution != 28) {
            tr = downsample_images(tr, 28, resolution);
            te = downsample_images(te, 28, resolution);
        }
        return std::make_pair(std::move(tr), std::move(te));
    }

    int run() override {
        auto loaded = load();
        if (!loaded) return input_error;
        const auto& [train_ds, test_ds] = *loaded;
        const Index dim = train_ds.dim();
        const auto t0 = Clock::now();
        const LabeledDataset sample = random_subsample(train_ds, n, common.seed);
        const LabeledDataset& fit_set = baseline_fit == "full" ? train_ds : sample;

        struct Row {
            std::string method;
            Index rank;
            MatrixXd transform;
        };
        std::vector<Row> rows;
        Index sqz_rank = 0;
        Json record = result_record(name(), common.seed, opts.echo());
        record["train_size"] = train_ds.size();
        record["test_size"] = test_ds.size();

        auto has = [&](const std::string& m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
        if (has("squeezefit")) {
            SqueezeConfig config;
            config.mode = parse_mode(mode);
            config.lambda = lambda;
            config.delta = delta;
            config.max_iters = max_iters;
            config.seed = common.seed;
            const ConstraintSet z = s > 0 ? build_constraints_nn(sample, s) : build_constraints_full(sample);
            const SqueezeResult res = solve(z, config);
            sqz_rank = rank_round(res.M, 0.5).rank;
            record["squeezefit"] = result_to_json(res, config);
            record["squeezefit"]["constraints"] = z.size();
            save_matrix(res.M, common.dir() / "M.json");
            rows.push_back({"squeezefit", sqz_rank, psd_sqrt(res.M)});
        }
        if (has("id")) rows.push_back({"id", dim, MatrixXd::Identity(dim, dim)});
        if (has("pca")) {
            const Index rank = pca_rank > 0 ? pca_rank : (sqz_rank > 0 ? sqz_rank : 5);
            std::string warning;
            const MatrixXd p = pca(fit_set, std::min(rank, dim), &warning);
            if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
            rows.push_back({"pca", static_cast<Index>(std::lround(p.trace())), p});
        }
        if (has("lda")) {
            const MatrixXd p = lda(fit_set);
            rows.push_back({"lda", static_cast<Index>(std::lround(p.trace())), p});
        }
        std::sort(rows.begin(), rows.end(), [&](const Row& x, const Row& y) {
            auto pos = [&](const std::string& m) { return std::find(methods.begin(), methods.end(), m) - methods.begin(); };
            return pos(x.method) < pos(y.method);
        });

        const Index kmax = *std::max_element(ks.begin(), ks.end());
        const fs::path dir = common.dir();
        std::ofstream table(dir / "table.csv");
        table << std::setprecision(17) << "method,rank,K,error_pct\n";
        Json cells = Json::array();
        std::cout << std::left << std::setw(12) << "method" << std::setw(6) << "rank" << std::setw(4) << "K"
                  << "error %\n";
        for (const Row& row : rows) {
            const Classifier clf = knn_fit(train_ds, row.transform, std::min(kmax, train_ds.size()));
            std::vector<Index> wrong(ks.size(), 0);
            for (Index i = 0; i < test_ds.size(); ++i) {
                const VectorXd q = row.transform * test_ds.point(i).transpose();
                const auto nbrs = clf.tree().knn(q, clf.k());
                for (std::size_t c = 0; c < ks.size(); ++c) {
                    const std::vector<Neighbor> head(nbrs.begin(), nbrs.begin() + std::min<Index>(ks[c], clf.k()));
                    if (majority_label(head, clf.labels()) != test_ds.label(i)) ++wrong[c];
                }
            }
            for (std::size_t c = 0; c < ks.size(); ++c) {
                const double pct = 100.0 * static_cast<double>(wrong[c]) / static_cast<double>(test_ds.size());
                table << row.method << ',' << row.rank << ',' << ks[c] << ',' << pct << '\n';
                cells.push_back({{"method", row.method}, {"rank", row.rank}, {"K", ks[c]}, {"error_pct", pct}});
                std::cout << std::setw(12) << row.method << std::setw(6) << row.rank << std::setw(4) << ks[c]
                          << std::fixed << std::setprecision(2) << pct << std::defaultfloat << "\n";
            }
        }
        record["table"] = cells;
        write_json(record, dir / "results.json");
        write_timings(dir, Json{{"total_seconds", seconds_since(t0)}});
        return ok;
    }
};

// ---------------------------------------------------------------- statdim

struct StatdimCommand : Command {
    std::string cone = "orthant";
    std::vector<Index> ns{8, 32, 128};
    double c1 = 50;
    int trials = 10000;

    std::string name() const override { return "statdim"; }

    void setup(CLI::App* sub) {
        attach(sub);
        opts.add("--cone", "cone", cone, "orthant or paper")->check(CLI::IsMember({"orthant", "paper"}));
        opts.add("--n", "n", ns, "Dimension(s)")->delimiter(',');
        opts.add("--c1", "c1", c1, "Cap constant of the paper cone");
        opts.add("--trials", "trials", trials, "Monte Carlo samples (at least 100)");
    }

    int run() override {
        if (trials < 100) throw InvalidInput("statdim: --trials must be at least 100");
        const auto t0 = Clock::now();
        const fs::path dir = common.dir();
        std::ofstream table(dir / "table.csv");
        table << std::setprecision(17) << "n,estimate,stderr,ratio,reliable\n";
        Json rows = Json::array();
        plot::Series series{cone, {}, {}, true};
        for (std::size_t k = 0; k < ns.size(); ++k) {
            const ConeSpec spec = cone == "orthant" ? ConeSpec::orthant(ns[k]) : ConeSpec::paper_cone(ns[k], c1);
            const auto est = estimate_stat_dim(spec, trials, derive_seed(common.seed, k), common.threads);
            const double ratio = est.estimate / static_cast<double>(ns[k]);
            table << ns[k] << ',' << est.estimate << ',' << est.stderr_ << ',' << ratio << ',' << est.reliable << '\n';
            rows.push_back({{"n", ns[k]},
                            {"estimate", est.estimate},
                            {"stderr", est.stderr_},
                            {"ratio", ratio},
                            {"reliable", est.reliable}});
            series.x.push_back(static_cast<double>(ns[k]));
            series.y.push_back(ratio);
            std::cout << std::setprecision(6) << "n " << ns[k] << "  estimate " << est.estimate << " +- "
                      << est.stderr_ << "  ratio " << ratio << (est.reliable ? "" : "  (unreliable)") << "\n";
        }
        Json record = result_record(name(), common.seed, opts.echo());
        record["estimates"] = rows;
        write_json(record, dir / "results.json");
        write_timings(dir, Json{{"total_seconds", seconds_since(t0)}});
        plot::write_svg(plot::Figure{"Statistical dimension", "n", "estimate / n", true, {series}}, dir / "statdim.svg");
        return ok;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SqueezeFit: low-rank metrics that keep differently labeled points apart"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);

    GenCommand gen;
    SolveCommand solve_cmd;
    CertifyCommand certify_cmd;
    RecoverCommand recover;
    CompareCommand compare;
    StatdimCommand statdim;
    gen.setup(app.add_subcommand("gen", "Write a synthetic dataset to CSV"));
    solve_cmd.setup(app.add_subcommand("solve", "Solve a SqueezeFit program on a CSV dataset"));
    certify_cmd.setup(app.add_subcommand("certify", "Check a candidate M for optimality via a dual certificate"));
    recover.setup(app.add_subcommand("recover", "Planted-model recovery experiments"));
    compare.setup(app.add_subcommand("compare", "k-NN error of id, PCA, LDA and SqueezeFit compressions"));
    statdim.setup(app.add_subcommand("statdim", "Monte Carlo statistical dimension estimates"));
    Command* commands[] = {&gen, &solve_cmd, &certify_cmd, &recover, &compare, &statdim};

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : input_error;
    }

    try {
        for (Command* cmd : commands)
            if (cmd->app->parsed()) {
                cmd->load_config();
                return cmd->run();
            }
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return infeasible;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return input_error;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return input_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return input_error;
    }
    return input_error;
}
