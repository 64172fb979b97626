#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "ssvd/model.hpp"

namespace ssvd {

// ===================== asymptotic quantities =====================

// Single-table asymptotic squared overlaps: beta_i^2 = (t^4 - c)/(t^4 + t^2)
// above the detectability threshold t^4 > c, and 0 at or below it.
struct BetaVector {
  Eigen::MatrixXd beta_sq;  // m x rank, entries in [0, 1)

  Eigen::VectorXd vector() const;  // rank-1 view of beta^2
  Eigen::VectorXd beta() const;    // element-wise sqrt, rank-1 view
};

BetaVector beta_from_theta(const ProblemSpec& spec);

// Limiting Gram matrix of stacked per-table singular vectors.
using ABetaMatrix = Eigen::MatrixXd;

ABetaMatrix build_a_beta(const BetaVector& beta);  // bb' + diag(1 - b^2)
ABetaMatrix build_a_beta(const BetaVector& beta,
                         const WeightVector& w);   // (wb)(wb)' + diag(w^2(1-b^2))

// ===================== prediction reports =====================

struct PredictionReport {
  std::string method;
  double overlap = 0.0;    // asymptotic squared overlap, in [0, 1]
  bool detectable = false;
  // Exactly one informative table in SVD-Stack: the single-table fix is
  // reported behind this flag instead of the random limit.
  bool degenerate = false;
  Eigen::MatrixXd weights;  // optimal/indicator weights when applicable
  // Diagnostics (NaN when not applicable to the method).
  double s = std::numeric_limits<double>::quiet_NaN();      // S
  double gamma = std::numeric_limits<double>::quiet_NaN();  // gamma*
  double lambda_max_a_beta = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> subset;  // binary mode: selected table indices
};

PredictionReport predict_unweighted_svdstack(const ProblemSpec& spec);
PredictionReport predict_unweighted_stacksvd(const ProblemSpec& spec);

enum class SubsetRule { Auto, Best };

// Binary weighting: keep a subset of tables, discard the rest. "Auto" keeps
// {i : theta_i^4 >= c_i}; "Best" enumerates all 2^m - 1 nonempty subsets
// (m <= enumeration_cap) and returns the maximizer.
PredictionReport predict_binary_stacksvd(const ProblemSpec& spec,
                                         SubsetRule rule = SubsetRule::Auto,
                                         int enumeration_cap = 20);
PredictionReport predict_binary_stacksvd(const ProblemSpec& spec,
                                         const std::vector<int>& subset);

WeightVector optimal_weights_stacksvd(const ProblemSpec& spec);
PredictionReport predict_weighted_stacksvd(const ProblemSpec& spec,
                                           double bisect_tol = 1e-12);

WeightVector optimal_weights_svdstack(const ProblemSpec& spec);
PredictionReport predict_weighted_svdstack(const ProblemSpec& spec);

// ===================== general weighted spectrum =====================

// Spectral analysis of an arbitrary nonnegative weighting of the stack.
struct WeightedStackSpectrum {
  double gamma1 = 0.0;            // top population eigenvalue
  double assumption_check = 0.0;  // A = sum c_i w_i^4/(gamma1 - w_i^2)^2
  double performance = 0.0;       // L(w); 0 when A >= 1
  bool has_outlier = false;       // secular root above max_i w_i^2 exists
};

WeightedStackSpectrum eval_general_weighted_stacksvd(const ProblemSpec& spec,
                                                     const WeightVector& w,
                                                     double bisect_tol = 1e-12);

// ===================== thresholds =====================

struct ThresholdReport {
  bool svdstack = false;             // beta_(2) > 0
  bool svdstack_weighted = false;    // max theta^4/c > 1
  bool stacksvd = false;             // ||theta||^4 > ||c||_1
  bool stacksvd_weighted = false;    // sum theta^4/c > 1
  bool stacksvd_binary_auto = false; // Cor.-2 numerator > 0 on the auto subset
  double svdstack_margin = 0.0;
  double svdstack_weighted_margin = 0.0;
  double stacksvd_margin = 0.0;
  double stacksvd_weighted_margin = 0.0;
  double stacksvd_binary_auto_margin = 0.0;
};

ThresholdReport detection_thresholds(const ProblemSpec& spec);

// ===================== rank r =====================

struct RankRPrediction {
  Eigen::VectorXd gamma;             // gamma_j per component (0 below threshold)
  Eigen::VectorXd s;                 // S_j per component
  Eigen::VectorXd stacksvd_overlap;  // = gamma_j
  Eigen::VectorXd svdstack_overlap;  // = S_j/(S_j + 1)
  std::vector<bool> stacksvd_detectable;
  std::vector<bool> svdstack_detectable;
  double stacksvd_total = 0.0;  // sum_j gamma_j
  double svdstack_total = 0.0;  // sum_j S_j/(S_j + 1)
};

RankRPrediction predict_rank_r(const ProblemSpec& spec,
                               double bisect_tol = 1e-12);

// Per-component weighting bookkeeping for the rank-r stack: the weighted
// stack built for component j carries every other component k with cross
// strength theta~_{jk}^2; the target component sits at descending rank l_j.
struct ComponentBookkeeping {
  Eigen::VectorXd weights;            // w_{. j} = theta_ij/sqrt(theta_ij^2+c_i)
  Eigen::VectorXd cross_strength_sq;  // theta~_{jk}^2 for k = 0..r-1
  int rank_index = 1;                 // l_j, 1-based
};

ComponentBookkeeping rank_r_weight_bookkeeping(const ProblemSpec& spec, int j);

// ===================== special instances =====================

// Instance on which every unweighted/binary prefix sits exactly at the
// detection threshold while optimal weighting achieves overlap >= 1 - eps:
// M = ceil(e^{-gamma_EM} e^{2/eps}) tables, theta_i = 1, c_i = 2i - 1.
ProblemSpec inadmissibility_instance(double epsilon);

}  // namespace ssvd
