#pragma once

#include <Eigen/Dense>
#include <string>

#include "ssvd/simulate.hpp"

namespace ssvd {

// Matrix file formats:
//   - CSV: no header, one row per line, fields parsed as doubles.
//   - binary: magic "SSVD", u32 version (= 1), u64 rows, u64 cols, then
//     row-major little-endian IEEE f64 payload.
// read_matrix sniffs the magic bytes and dispatches.

Eigen::MatrixXd read_matrix(const std::string& path);
Eigen::MatrixXd read_matrix_csv(const std::string& path);
Eigen::MatrixXd read_matrix_binary(const std::string& path);

// CSV values are written with 17 significant digits (lossless for f64).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& x);
void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& x);

// Long-format results: header line, then one row per grid point x method.
std::string result_csv(const ExperimentResult& result);
void write_result_csv(const std::string& path, const ExperimentResult& result);

// Full-plan JSON (the simulate sidecar / generate manifest payload).
std::string plan_json(const ExperimentPlan& plan);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace ssvd
