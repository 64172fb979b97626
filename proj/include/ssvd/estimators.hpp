#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssvd/linalg.hpp"
#include "ssvd/model.hpp"
#include "ssvd/theory.hpp"

namespace ssvd {

struct EstimatorOptions {
  SvdOptions svd;
  // Subtract per-table column means before anything else. Off by default:
  // the model already assumes zero-mean noise. Real-data pipelines opt in.
  bool center_columns = false;
  // Divide each table by an estimated noise scale (bulk median vs the
  // Marchenko-Pastur median). Experimental; the theory assumes known scale.
  bool rescale_noise = false;
};

// ===================== rank-1 / custom-weight estimators =====================

// Right singular subspace of the vertically stacked [w_1 X_1; ...; w_m X_m].
// The stack is never materialized; a row-block operator feeds the solver.
SubspaceEstimate stack_svd(const TableSet& tables, const WeightVector& w,
                           int k, const EstimatorOptions& opts = {});
SubspaceEstimate stack_svd(const TableSet& tables, int k = 1,
                           const EstimatorOptions& opts = {});  // w = 1

// Per-table top right singular vectors stacked as rows w_i vhat_i', then the
// k leading right singular vectors of that m x d matrix.
SubspaceEstimate svd_stack(const TableSet& tables, const WeightVector& w,
                           int k, const EstimatorOptions& opts = {});
SubspaceEstimate svd_stack(const TableSet& tables, int k = 1,
                           const EstimatorOptions& opts = {});  // w = 1

// ===================== rank-r estimators =====================

// Per component j: weighted stack with w_ij = theta_ij/sqrt(theta_ij^2+c_i),
// target component extracted at its bookkeeping rank l_j.
SubspaceEstimate stack_svd_rank_r(const TableSet& tables,
                                  const ProblemSpec& spec,
                                  const EstimatorOptions& opts = {});

// Per table: top-r right singular vectors; rows w_ij vhat_ij' stacked into an
// (m r) x d matrix whose top-r right singular vectors are returned.
SubspaceEstimate svd_stack_rank_r(const TableSet& tables,
                                  const ProblemSpec& spec,
                                  const EstimatorOptions& opts = {});

// ===================== signal-strength estimation =====================

enum class ThetaMethod { AboveThresholdQuadratic, CrossTable };

struct ThetaEstimate {
  Eigen::VectorXd theta_hat;  // >= 0
  Eigen::VectorXd beta_hat;   // in [0, 1)
  ThetaMethod method = ThetaMethod::AboveThresholdQuadratic;
  int reference = -1;  // table index used in cross-table mode
};

// Inverts sigma_1(X)^2 -> theta^2 + 1 + c + c/theta^2 for a table whose top
// singular value clears the bulk edge (1+sqrt(c))^2 by at least edge_margin.
ThetaEstimate estimate_theta_above_threshold(const Eigen::MatrixXd& table,
                                             double c,
                                             double edge_margin = 1e-6,
                                             const EstimatorOptions& opts = {});

// theta_tgt from || X_tgt vhat_ref ||^2 = theta^2 beta_ref^2 + c_tgt, using a
// reference table that is itself above threshold.
ThetaEstimate estimate_theta_cross_table(const Eigen::MatrixXd& reference,
                                         double c_ref,
                                         const Eigen::MatrixXd& target,
                                         double c_tgt,
                                         double edge_margin = 1e-6,
                                         const EstimatorOptions& opts = {});

// ===================== data-driven weights =====================

struct AutoWeightsResult {
  WeightVector weights;
  Eigen::VectorXd theta_hat;           // per table
  Eigen::VectorXd beta_hat;            // per table
  std::vector<ThetaMethod> method;     // how each theta_hat was obtained
  int reference = -1;                  // cross-table reference index
};

// Estimates theta for every table (quadratic inversion where the top singular
// value clears the bulk edge, cross-table from the strongest reference
// otherwise) and applies the requested method's optimal weight formula.
AutoWeightsResult auto_weights(const TableSet& tables, Method method,
                               double edge_margin = 1e-6,
                               const EstimatorOptions& opts = {});

}  // namespace ssvd
