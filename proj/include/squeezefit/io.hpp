#pragma once

// JSON serialization of matrices, solver results and certificates. Doubles are
// written in shortest round-trip form, so reading back reproduces every bit.

#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "squeezefit/duality.hpp"
#include "squeezefit/solver.hpp"

namespace sqz {

using Json = nlohmann::json;

/// {"dim": d, "data": [row-major entries]} for square matrices.
Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);

void save_matrix(const MatrixXd& m, const std::filesystem::path& path);
/// Throws FormatError on malformed input.
MatrixXd load_matrix(const std::filesystem::path& path);

/// {delta, pairs, z, gamma: [[k, value]...], Y, residuals, values}.
Json certificate_to_json(const DualCertificate& cert, double delta, const std::map<std::string, double>& residuals,
                         double primal, double dual);
DualCertificate certificate_from_json(const Json& j);

Json report_to_json(const CertificateReport& report, double delta);
Json result_to_json(const SqueezeResult& result, const SqueezeConfig& config);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);

} // namespace sqz
