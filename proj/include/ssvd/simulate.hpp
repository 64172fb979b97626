#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ssvd/estimators.hpp"
#include "ssvd/model.hpp"
#include "ssvd/rng.hpp"
#include "ssvd/theory.hpp"

namespace ssvd {

// ===================== noise =====================

// All families are scaled so entries have mean 0 and variance 1/d.
enum class NoiseFamily { Gaussian, CenteredExponential, Rademacher };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Gaussian;
};

const char* noise_family_name(NoiseFamily family);
NoiseFamily noise_family_from_name(const std::string& name);  // ConfigError

// ===================== generation =====================

// Samples V (d x r), per-table U_i (n_i x r) Haar frames and noise, and
// returns X_i = U_i diag(theta_i.) V' + E_i with n_i = round(d c_i).
// Sub-streams are derived from `seed`, so results are bitwise reproducible.
std::pair<TableSet, GroundTruth> generate_tables(const ProblemSpec& spec,
                                                 int d, const NoiseSpec& noise,
                                                 std::uint64_t seed);

// Reproduces the randomized-spec sweep: c_i^{1/4} ~ Expo(1) + 0.1 and
// theta_i = c_i^{1/4} exp(W) with W ~ N(mu, 1/100).
ProblemSpec sample_random_spec(double mu, int m, std::uint64_t seed);

// Semi-synthetic count pipeline: shuffle rows into `splits` blocks, add
// entrywise Poisson(lambda_i) ambient counts to block i, apply the
// variance-stabilizing transform X = 2 sqrt(Y/d), optionally center columns
// (on by default here, unlike the estimators).
TableSet count_pipeline(const Eigen::MatrixXd& counts,
                        const std::vector<double>& ambient_rates, int splits,
                        std::uint64_t seed, bool center_columns = true);

// ===================== experiment harness =====================

enum class SimMethod {
  StackSvd,          // unweighted
  StackSvdBinary,    // oracle auto subset
  StackSvdWeighted,  // oracle optimal weights
  SvdStack,          // unweighted
  SvdStackWeighted,  // oracle optimal weights
  SvdStackSingle,    // single-table baseline (lowest-noise style)
  StackSvdRankR,
  SvdStackRankR,
};

const char* sim_method_name(SimMethod method);
SimMethod sim_method_from_name(const std::string& name);  // ConfigError

enum class GridKind { D, M };

struct ExperimentPlan {
  ProblemSpec spec;
  GridKind grid = GridKind::D;
  std::vector<int> d_grid;  // grid == D: the d values; grid == M: single d
  std::vector<int> m_grid;  // grid == M: the table counts
  int replicates = 10;
  std::uint64_t seed = 1;
  std::vector<SimMethod> methods;
  NoiseSpec noise;
  int single_table_index = 0;  // for SvdStackSingle
  EstimatorOptions estimator;
};

struct ResultRow {
  double grid_value = 0.0;
  std::string method;
  double mean_overlap = 0.0;
  double std_err = 0.0;
  double theory = 0.0;
  double bias = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
};

// Truncate to the first M tables, or extend by replicating the last table's
// (theta, c), so a single base spec can drive an M grid.
ProblemSpec resize_tables(const ProblemSpec& spec, int m);

// Monte Carlo sweep: per grid point and replicate, generate data with a
// counter-derived sub-seed, run every requested method on the same tables,
// and aggregate mean/SE/bias against the matching theory predictions.
// Deterministic given the plan, independent of scheduling.
ExperimentResult run_experiment(const ExperimentPlan& plan);

}  // namespace ssvd
