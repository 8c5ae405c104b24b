#include "squeezefit/io.hpp"

#include <cmath>
#include <fstream>

#include "squeezefit/errors.hpp"

namespace sqz {

Json matrix_to_json(const MatrixXd& m) {
    if (m.rows() != m.cols()) throw InvalidInput("matrix_to_json: matrix is not square");
    Json data = Json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return Json{{"dim", m.rows()}, {"data", std::move(data)}};
}

MatrixXd matrix_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("data"))
        throw FormatError("matrix: expected an object with \"dim\" and \"data\"");
    if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 0) throw FormatError("matrix: bad \"dim\"");
    const auto d = static_cast<Index>(j["dim"].get<long long>());
    const Json& data = j["data"];
    if (!data.is_array() || static_cast<Index>(data.size()) != d * d)
        throw FormatError("matrix: \"data\" must hold dim*dim numbers");
    MatrixXd m(d, d);
    for (Index k = 0; k < d * d; ++k) {
        const Json& v = data[static_cast<std::size_t>(k)];
        if (!v.is_number()) throw FormatError("matrix: non-numeric entry");
        m(k / d, k % d) = v.get<double>();
    }
    return m;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void save_matrix(const MatrixXd& m, const std::filesystem::path& path) { write_json(matrix_to_json(m), path); }

MatrixXd load_matrix(const std::filesystem::path& path) { return matrix_from_json(read_json(path)); }

namespace {

Json vector_to_json(const VectorXd& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

} // namespace

Json certificate_to_json(const DualCertificate& cert, double delta, const std::map<std::string, double>& residuals,
                         double primal, double dual) {
    Json pairs = Json::array();
    Json zs = Json::array();
    for (const auto& p : cert.constraints.pairs) {
        pairs.push_back({p.i, p.j});
        zs.push_back(vector_to_json(p.z));
    }
    Json gamma = Json::array();
    for (const auto& [k, g] : cert.gamma) gamma.push_back({k, g});
    return Json{{"delta", delta},
                {"dim", cert.constraints.dim},
                {"pairs", std::move(pairs)},
                {"z", std::move(zs)},
                {"gamma", std::move(gamma)},
                {"Y", matrix_to_json(cert.Y)},
                {"residuals", residuals},
                {"values", {{"primal", primal}, {"dual", dual}}}};
}

DualCertificate certificate_from_json(const Json& j) {
    try {
        DualCertificate cert;
        cert.Y = matrix_from_json(j.at("Y"));
        cert.constraints.dim = j.at("dim").get<Index>();
        const Json& pairs = j.at("pairs");
        const Json& zs = j.at("z");
        if (pairs.size() != zs.size()) throw FormatError("certificate: pairs and z differ in length");
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            DifferencePair p;
            p.i = pairs[k].at(0).get<Index>();
            p.j = pairs[k].at(1).get<Index>();
            const auto values = zs[k].get<std::vector<double>>();
            if (static_cast<Index>(values.size()) != cert.constraints.dim)
                throw FormatError("certificate: z has wrong dimension");
            p.z = Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
            cert.constraints.pairs.push_back(std::move(p));
        }
        for (const auto& entry : j.at("gamma")) {
            const auto k = entry.at(0).get<Index>();
            if (k < 0 || k >= cert.constraints.size()) throw FormatError("certificate: gamma index out of range");
            cert.gamma.emplace_back(k, entry.at(1).get<double>());
        }
        if (cert.Y.rows() != cert.constraints.dim) throw FormatError("certificate: Y has wrong dimension");
        return cert;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("certificate: ") + e.what());
    }
}

Json report_to_json(const CertificateReport& report, double delta) {
    Json out{{"verdict", to_string(report.verdict)},
             {"feasible", report.feasible},
             {"primal_value", report.primal_value},
             {"dual_value", report.dual_value},
             {"gap", report.gap},
             {"min_length", report.min_length},
             {"tight_set_size", report.tight_set_size},
             {"residuals", report.residuals},
             {"message", report.message}};
    if (report.violating_pair) out["violating_pair"] = {report.violating_pair->first, report.violating_pair->second};
    if (report.certificate)
        out["certificate"] =
            certificate_to_json(*report.certificate, delta, report.residuals, report.primal_value, report.dual_value);
    return out;
}

Json result_to_json(const SqueezeResult& result, const SqueezeConfig& config) {
    return Json{{"mode", to_string(config.mode)},
                {"delta", config.effective_delta()},
                {"lambda", config.lambda},
                {"objective", result.objective},
                {"worst_violation", result.worst_violation},
                {"hinge_value", result.hinge_value},
                {"lower_bound", result.lower_bound},
                {"iterations", result.iterations},
                {"converged", result.converged}};
}

} // namespace sqz
