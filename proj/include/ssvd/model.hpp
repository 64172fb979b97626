#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ssvd/errors.hpp"

namespace ssvd {

// ===================== problem instances =====================

// Asymptotic problem instance: per-table signal strengths theta(i,j) and
// aspect ratios c(i) = lim n_i/d. Carries no data; c is a real so pure
// asymptotic instances need no integer n_i behind them.
struct ProblemSpec {
  Eigen::MatrixXd theta;  // m x rank, theta(i,j) >= 0
  Eigen::VectorXd c;      // length m, c(i) > 0

  int m() const { return static_cast<int>(c.size()); }
  int rank() const { return static_cast<int>(theta.cols()); }

  // Rank-1 view of theta; ShapeMismatch if rank != 1.
  Eigen::VectorXd theta_vector() const;

  static ProblemSpec rank1(const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& c);
};

// Checks the ProblemSpec invariants; the error names the violated field.
void validate_spec(const ProblemSpec& spec);

// ===================== observed data =====================

// Observed tables X_1..X_m sharing column dimension d. d is stored
// explicitly so mixed-dimension ingestion fails at construction, not deep
// inside an estimator.
struct TableSet {
  std::vector<Eigen::MatrixXd> tables;
  Eigen::Index d = 0;

  int m() const { return static_cast<int>(tables.size()); }
  Eigen::Index rows(int i) const { return tables[static_cast<size_t>(i)].rows(); }
  Eigen::VectorXd aspect_ratios() const;  // n_i / d per table

  void validate() const;
  static TableSet from_tables(std::vector<Eigen::MatrixXd> tables);
};

// Nonnegative per-table weights; one column per component in rank-r mode.
// All operations are invariant to positive rescaling of the whole vector.
struct WeightVector {
  Eigen::MatrixXd w;  // m x rank

  int m() const { return static_cast<int>(w.rows()); }
  int rank() const { return static_cast<int>(w.cols()); }

  Eigen::VectorXd vector() const;  // rank-1 view
  void validate() const;           // entries >= 0, at least one > 0

  static WeightVector ones(int m);
  static WeightVector from_vector(const Eigen::VectorXd& v);
};

// ===================== estimates and truth =====================

enum class Method { StackSvd, SvdStack };
enum class Weighting { Unweighted, Binary, Weighted, Custom };

std::string method_name(Method method, Weighting weighting);

// Estimated shared right singular subspace: unit columns, canonical signs.
struct SubspaceEstimate {
  Eigen::MatrixXd vectors;          // d x r
  Eigen::VectorXd singular_values;  // leading singular values per column
  Method method = Method::StackSvd;
  Weighting weighting = Weighting::Unweighted;
};

struct GroundTruth {
  Eigen::MatrixXd v;               // d x r, orthonormal columns
  std::vector<Eigen::MatrixXd> u;  // optional per-table left factors
};

struct AlignmentReport {
  Eigen::VectorXd component_overlap;  // (v_j' vhat_j)^2 per component
  double frobenius_sq = 0.0;          // ||V' Vhat||_F^2
  double projection_distance = 0.0;   // ||P_vhat - P_v||_F
};

// Squared-overlap metrics between an estimate and the truth. Projections use
// P_A = A (A'A)^{-1} A' so non-orthogonal estimate columns are handled.
AlignmentReport alignment(const SubspaceEstimate& estimate,
                          const GroundTruth& truth);

// Flip column signs so the entry of largest absolute value in each column is
// nonnegative (ties broken by lowest row index). Deterministic canonical
// form for sign-ambiguous singular vectors.
void canonicalize_signs(Eigen::MatrixXd& columns);

}  // namespace ssvd
