#include "ssvd/model.hpp"

#include <cmath>

namespace ssvd {

// ===================== ProblemSpec =====================

Eigen::VectorXd ProblemSpec::theta_vector() const {
  if (theta.cols() != 1) {
    fail(ErrorCode::ShapeMismatch,
         "theta_vector requires a rank-1 spec, got rank " +
             std::to_string(theta.cols()));
  }
  return theta.col(0);
}

ProblemSpec ProblemSpec::rank1(const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& c) {
  ProblemSpec spec;
  spec.theta = theta;
  spec.c = c;
  return spec;
}

void validate_spec(const ProblemSpec& spec) {
  if (spec.theta.rows() != spec.c.size()) {
    fail(ErrorCode::ShapeMismatch,
         "theta has " + std::to_string(spec.theta.rows()) +
             " rows but c has length " + std::to_string(spec.c.size()));
  }
  if (spec.c.size() < 1) {
    fail(ErrorCode::ShapeMismatch, "spec must contain at least one table");
  }
  if (spec.theta.cols() < 1) {
    fail(ErrorCode::ShapeMismatch, "rank must be >= 1");
  }
  for (Eigen::Index i = 0; i < spec.c.size(); ++i) {
    if (!(spec.c(i) > 0.0) || !std::isfinite(spec.c(i))) {
      fail(ErrorCode::NonPositiveAspectRatio,
           "c[" + std::to_string(i) + "] = " + std::to_string(spec.c(i)) +
               "; aspect ratios must be positive");
    }
  }
  for (Eigen::Index i = 0; i < spec.theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < spec.theta.cols(); ++j) {
      if (!(spec.theta(i, j) >= 0.0) || !std::isfinite(spec.theta(i, j))) {
        fail(ErrorCode::NegativeTheta,
             "theta[" + std::to_string(i) + "," + std::to_string(j) + "] = " +
                 std::to_string(spec.theta(i, j)) +
                 "; signal strengths must be nonnegative");
      }
    }
  }
}

// ===================== TableSet =====================

Eigen::VectorXd TableSet::aspect_ratios() const {
  Eigen::VectorXd ratios(m());
  for (int i = 0; i < m(); ++i) {
    ratios(i) = static_cast<double>(rows(i)) / static_cast<double>(d);
  }
  return ratios;
}

void TableSet::validate() const {
  if (tables.empty()) {
    fail(ErrorCode::ShapeMismatch, "TableSet must contain at least one table");
  }
  if (d < 1) {
    fail(ErrorCode::ShapeMismatch, "TableSet column dimension must be >= 1");
  }
  for (size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].cols() != d) {
      fail(ErrorCode::ShapeMismatch,
           "table " + std::to_string(i) + " has " +
               std::to_string(tables[i].cols()) + " columns, expected " +
               std::to_string(d));
    }
    if (tables[i].rows() < 1) {
      fail(ErrorCode::ShapeMismatch,
           "table " + std::to_string(i) + " has no rows");
    }
  }
}

TableSet TableSet::from_tables(std::vector<Eigen::MatrixXd> tables) {
  TableSet set;
  set.tables = std::move(tables);
  set.d = set.tables.empty() ? 0 : set.tables.front().cols();
  set.validate();
  return set;
}

// ===================== WeightVector =====================

Eigen::VectorXd WeightVector::vector() const {
  if (w.cols() != 1) {
    fail(ErrorCode::ShapeMismatch,
         "weight vector view requires rank-1 weights, got rank " +
             std::to_string(w.cols()));
  }
  return w.col(0);
}

void WeightVector::validate() const {
  if (w.rows() < 1 || w.cols() < 1) {
    fail(ErrorCode::ShapeMismatch, "weights must be nonempty");
  }
  bool any_positive = false;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (!(w(i, j) >= 0.0) || !std::isfinite(w(i, j))) {
        fail(ErrorCode::ShapeMismatch,
             "weight[" + std::to_string(i) + "," + std::to_string(j) +
                 "] must be finite and nonnegative");
      }
      any_positive = any_positive || w(i, j) > 0.0;
    }
  }
  if (!any_positive) {
    fail(ErrorCode::ShapeMismatch, "at least one weight must be positive");
  }
}

WeightVector WeightVector::ones(int m) {
  WeightVector weights;
  weights.w = Eigen::MatrixXd::Ones(m, 1);
  return weights;
}

WeightVector WeightVector::from_vector(const Eigen::VectorXd& v) {
  WeightVector weights;
  weights.w = v;
  return weights;
}

// ===================== estimates =====================

std::string method_name(Method method, Weighting weighting) {
  std::string name = method == Method::StackSvd ? "stack-svd" : "svd-stack";
  switch (weighting) {
    case Weighting::Unweighted: return name + "/unweighted";
    case Weighting::Binary: return name + "/binary";
    case Weighting::Weighted: return name + "/weighted";
    case Weighting::Custom: return name + "/custom";
  }
  return name;
}

void canonicalize_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index at = 0;
    columns.col(j).cwiseAbs().maxCoeff(&at);
    if (columns(at, j) < 0.0) columns.col(j) = -columns.col(j);
  }
}

AlignmentReport alignment(const SubspaceEstimate& estimate,
                          const GroundTruth& truth) {
  const Eigen::MatrixXd& vhat = estimate.vectors;
  const Eigen::MatrixXd& v = truth.v;
  if (vhat.rows() != v.rows() || vhat.cols() != v.cols()) {
    fail(ErrorCode::ShapeMismatch,
         "estimate is " + std::to_string(vhat.rows()) + "x" +
             std::to_string(vhat.cols()) + " but truth is " +
             std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
  }

  AlignmentReport report;
  const Eigen::MatrixXd cross = v.transpose() * vhat;  // r x r
  report.component_overlap = cross.diagonal().array().square();
  report.frobenius_sq = cross.squaredNorm();

  // ||P_vhat - P_v||_F^2 = tr(P_vhat) + tr(P_v) - 2 tr(P_v P_vhat); the
  // estimate's Gram is inverted explicitly to cover non-orthogonal columns.
  const Eigen::MatrixXd gram = vhat.transpose() * vhat;
  const Eigen::MatrixXd gram_inv_cross =
      gram.ldlt().solve(vhat.transpose() * v);  // (Vhat'Vhat)^{-1} Vhat'V
  const double trace_cross = (v.transpose() * vhat * gram_inv_cross).trace();
  const double r = static_cast<double>(v.cols());
  double dist_sq = 2.0 * r - 2.0 * trace_cross;
  report.projection_distance = std::sqrt(std::max(dist_sq, 0.0));
  return report;
}

}  // namespace ssvd
