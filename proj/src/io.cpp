#include "ssvd/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ssvd/errors.hpp"

namespace ssvd {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'V', 'D'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::IoError, path + ": " + what);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    size_t pos = 0;
    while (pos <= line.size()) {
      const size_t comma = line.find(',', pos);
      const std::string field =
          line.substr(pos, comma == std::string::npos ? std::string::npos
                                                      : comma - pos);
      try {
        size_t used = 0;
        row.push_back(std::stod(field, &used));
        while (used < field.size() &&
               std::isspace(static_cast<unsigned char>(field[used])))
          ++used;
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        io_fail(path, "line " + std::to_string(rows.size() + 1) +
                          ": cannot parse '" + field + "' as a number");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      io_fail(path, "line " + std::to_string(rows.size() + 1) + " has " +
                        std::to_string(row.size()) + " fields, expected " +
                        std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) io_fail(path, "no rows");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      x(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return x;
}

Eigen::MatrixXd read_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");

  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    io_fail(path, "not an SSVD binary matrix (bad magic)");
  if (version != kVersion)
    io_fail(path, "unsupported version " + std::to_string(version));
  if (rows == 0 || cols == 0) io_fail(path, "empty matrix");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  std::vector<double> buf(static_cast<size_t>(cols));
  for (std::uint64_t i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(cols * sizeof(double)));
    if (!in) io_fail(path, "truncated payload");
    for (std::uint64_t j = 0; j < cols; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          buf[static_cast<size_t>(j)];
  }
  return x;
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.close();
  if (in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0)
    return read_matrix_binary(path);
  return read_matrix_csv(path);
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& x) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out << ',';
      out << format_double(x(i, j));
    }
    out << '\n';
  }
  if (!out) io_fail(path, "write failed");
}

void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  const std::uint64_t rows = static_cast<std::uint64_t>(x.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(x.cols());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  std::vector<double> buf(static_cast<size_t>(cols));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      buf[static_cast<size_t>(j)] = x(i, j);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
  }
  if (!out) io_fail(path, "write failed");
}

std::string result_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "grid_value,method,mean_overlap,std_err,theory,bias\n";
  for (const ResultRow& row : result.rows) {
    out << format_double(row.grid_value) << ',' << row.method << ','
        << format_double(row.mean_overlap) << ',' << format_double(row.std_err)
        << ',' << format_double(row.theory) << ',' << format_double(row.bias)
        << '\n';
  }
  return out.str();
}

void write_result_csv(const std::string& path,
                      const ExperimentResult& result) {
  write_text(path, result_csv(result));
}

std::string plan_json(const ExperimentPlan& plan) {
  nlohmann::ordered_json j;
  j["spec"]["theta"] = nlohmann::ordered_json::array();
  for (int i = 0; i < plan.spec.m(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int k = 0; k < plan.spec.rank(); ++k) row.push_back(plan.spec.theta(i, k));
    j["spec"]["theta"].push_back(row);
  }
  j["spec"]["c"] = std::vector<double>(plan.spec.c.data(),
                                       plan.spec.c.data() + plan.spec.m());
  j["grid"] = plan.grid == GridKind::D ? "d" : "m";
  j["d_grid"] = plan.d_grid;
  if (plan.grid == GridKind::M) j["m_grid"] = plan.m_grid;
  j["replicates"] = plan.replicates;
  j["seed"] = plan.seed;
  j["noise"] = noise_family_name(plan.noise.family);
  j["methods"] = nlohmann::ordered_json::array();
  for (SimMethod m : plan.methods) j["methods"].push_back(sim_method_name(m));
  if (std::count(plan.methods.begin(), plan.methods.end(),
                 SimMethod::SvdStackSingle))
    j["single_table_index"] = plan.single_table_index;
  j["estimator"]["center_columns"] = plan.estimator.center_columns;
  j["estimator"]["rescale_noise"] = plan.estimator.rescale_noise;
  j["estimator"]["svd"]["dense_threshold"] = plan.estimator.svd.dense_threshold;
  j["estimator"]["svd"]["max_iterations"] = plan.estimator.svd.max_iterations;
  j["estimator"]["svd"]["tol"] = plan.estimator.svd.tol;
  j["estimator"]["svd"]["fail_on_max_iterations"] =
      plan.estimator.svd.fail_on_max_iterations;
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) io_fail(path, "write failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace ssvd
