#include "ssvd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "ssvd/errors.hpp"

namespace ssvd {

namespace {

// ---------- noise-scale estimation (experimental rescale option) ----------

// Median of the Marchenko-Pastur law with ratio lambda in (0, 1]: CDF by
// Simpson quadrature after the substitution x = center + radius sin(phi),
// which absorbs the edge square-root singularities.
double mp_median_unit(double lambda) {
  constexpr double pi = std::numbers::pi;
  const double lo = (1.0 - std::sqrt(lambda)) * (1.0 - std::sqrt(lambda));
  const double hi = (1.0 + std::sqrt(lambda)) * (1.0 + std::sqrt(lambda));
  const double center = 0.5 * (hi + lo), radius = 0.5 * (hi - lo);
  const auto cdf = [&](double t) {
    const double phi_t = std::asin(std::clamp((t - center) / radius, -1.0, 1.0));
    const int n = 400;  // even
    const double h = (phi_t + pi / 2) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double phi = -pi / 2 + i * h;
      double g;
      if (center - radius < 1e-12 * center) {
        // lambda = 1: the lower edge is 0 and cos^2(phi)/x simplifies to
        // (1 - sin(phi))/radius exactly, avoiding 0/0 at the endpoint.
        g = radius * (1.0 - std::sin(phi)) / (2.0 * pi * lambda);
      } else {
        const double x = center + radius * std::sin(phi);
        g = radius * radius * std::cos(phi) * std::cos(phi) /
            (2.0 * pi * lambda * x);
      }
      s += g * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return s * h / 3.0;
  };
  double a = lo, b = hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (a + b);
    (cdf(mid) < 0.5 ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

// Median squared singular value of a pure-noise n x d table with entry
// variance 1/d, as a function of c = n/d.
double mp_median(double c) {
  return c <= 1.0 ? mp_median_unit(c) : c * mp_median_unit(1.0 / c);
}

Eigen::MatrixXd transform_table(const Eigen::MatrixXd& x,
                                const EstimatorOptions& opts,
                                Eigen::Index d) {
  Eigen::MatrixXd t = x;
  if (opts.center_columns) t.rowwise() -= t.colwise().mean();
  if (opts.rescale_noise) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(t);  // values only
    const Eigen::VectorXd sq = svd.singularValues().cwiseAbs2();
    std::vector<double> v(sq.data(), sq.data() + sq.size());
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    const double med = v[v.size() / 2];
    const double c = static_cast<double>(t.rows()) / static_cast<double>(d);
    const double scale_sq = med / mp_median(c);
    if (scale_sq > 0.0) t /= std::sqrt(scale_sq);
  }
  return t;
}

// Returns `tables` untouched when no preprocessing is requested; otherwise
// fills `storage` with the transformed copy.
const TableSet& maybe_preprocess(const TableSet& tables,
                                 const EstimatorOptions& opts,
                                 TableSet& storage) {
  if (!opts.center_columns && !opts.rescale_noise) return tables;
  storage.d = tables.d;
  storage.tables.clear();
  storage.tables.reserve(tables.tables.size());
  for (const auto& t : tables.tables)
    storage.tables.push_back(transform_table(t, opts, tables.d));
  return storage;
}

// ---------- stacked-operator plumbing ----------

// Row-block operator over the weighted stack of the tables with w_i > 0.
// Tables with zero weight are excluded outright, which makes the zero-weight
// exclusion invariant exact rather than approximate.
struct StackPlan {
  std::vector<int> included;
  std::vector<double> weights;
  Eigen::Index rows = 0;
};

StackPlan plan_stack(const TableSet& tables, const Eigen::VectorXd& w) {
  StackPlan plan;
  for (int i = 0; i < tables.m(); ++i) {
    if (w(i) > 0.0) {
      plan.included.push_back(i);
      plan.weights.push_back(w(i));
      plan.rows += tables.rows(i);
    }
  }
  return plan;
}

SvdTriplet stacked_svd(const TableSet& tables, const StackPlan& plan, int k,
                       const SvdOptions& opts) {
  const Eigen::Index d = tables.d;
  if (std::min(plan.rows, d) <= opts.dense_threshold) {
    Eigen::MatrixXd stack(plan.rows, d);
    Eigen::Index off = 0;
    for (size_t s = 0; s < plan.included.size(); ++s) {
      const auto& t = tables.tables[static_cast<size_t>(plan.included[s])];
      stack.middleRows(off, t.rows()) = plan.weights[s] * t;
      off += t.rows();
    }
    return truncated_svd(stack, k, opts);
  }

  MatVec op;
  op.rows = plan.rows;
  op.cols = d;
  op.apply = [&tables, &plan](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.resize(plan.rows);
    Eigen::Index off = 0;
    for (size_t s = 0; s < plan.included.size(); ++s) {
      const auto& t = tables.tables[static_cast<size_t>(plan.included[s])];
      y.segment(off, t.rows()).noalias() = plan.weights[s] * (t * x);
      off += t.rows();
    }
  };
  op.apply_t = [&tables, &plan](const Eigen::VectorXd& u, Eigen::VectorXd& y) {
    y.setZero(tables.d);
    Eigen::Index off = 0;
    for (size_t s = 0; s < plan.included.size(); ++s) {
      const auto& t = tables.tables[static_cast<size_t>(plan.included[s])];
      y.noalias() += plan.weights[s] * (t.transpose() * u.segment(off, t.rows()));
      off += t.rows();
    }
  };
  return truncated_svd(op, k, opts);
}

Eigen::VectorXd rank1_weights(const TableSet& tables, const WeightVector& w) {
  w.validate();
  if (w.rank() != 1 || w.m() != tables.m())
    fail(ErrorCode::ShapeMismatch,
         "weight vector is " + std::to_string(w.m()) + "x" +
             std::to_string(w.rank()) + ", need " + std::to_string(tables.m()) +
             "x1");
  return w.w.col(0);
}

// Quadratic inversion of the outlier location sigma_1^2 = phi(theta) =
// theta^2 + 1 + c + c/theta^2, valid above the bulk edge (1+sqrt(c))^2.
double theta_from_sigma1_sq(double s2, double c, double edge_margin) {
  const double edge = (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
  if (!(s2 > edge + edge_margin))
    fail(ErrorCode::NoOutlierSingularValue,
         "sigma_1^2 = " + std::to_string(s2) +
             " does not clear the bulk edge " + std::to_string(edge));
  const double shift = s2 - (1.0 + c);
  const double disc = std::max(shift * shift - 4.0 * c, 0.0);
  return std::sqrt(0.5 * (shift + std::sqrt(disc)));
}

double beta_hat_from_theta(double theta, double c) {
  const double t2 = theta * theta, t4 = t2 * t2;
  if (!(t4 > c)) return 0.0;
  const double b2 = std::min((t4 - c) / (t4 + t2), 1.0 - 1e-15);
  return std::sqrt(b2);
}

}  // namespace

// ===================== rank-1 / custom-weight estimators =====================

SubspaceEstimate stack_svd(const TableSet& tables, const WeightVector& w,
                           int k, const EstimatorOptions& opts) {
  tables.validate();
  const Eigen::VectorXd wv = rank1_weights(tables, w);
  TableSet storage;
  const TableSet& data = maybe_preprocess(tables, opts, storage);
  const StackPlan plan = plan_stack(data, wv);
  const SvdTriplet trip = stacked_svd(data, plan, k, opts.svd);

  SubspaceEstimate out;
  out.vectors = trip.right;
  out.singular_values = trip.singular_values;
  out.method = Method::StackSvd;
  out.weighting = Weighting::Custom;
  canonicalize_signs(out.vectors);
  return out;
}

SubspaceEstimate stack_svd(const TableSet& tables, int k,
                           const EstimatorOptions& opts) {
  SubspaceEstimate out =
      stack_svd(tables, WeightVector::ones(tables.m()), k, opts);
  out.weighting = Weighting::Unweighted;
  return out;
}

SubspaceEstimate svd_stack(const TableSet& tables, const WeightVector& w,
                           int k, const EstimatorOptions& opts) {
  tables.validate();
  const Eigen::VectorXd wv = rank1_weights(tables, w);
  TableSet storage;
  const TableSet& data = maybe_preprocess(tables, opts, storage);

  std::vector<int> included;
  for (int i = 0; i < data.m(); ++i)
    if (wv(i) > 0.0) included.push_back(i);

  Eigen::MatrixXd vtil(static_cast<Eigen::Index>(included.size()), data.d);
  for (size_t s = 0; s < included.size(); ++s) {
    const int i = included[s];
    const SvdTriplet trip =
        truncated_svd(data.tables[static_cast<size_t>(i)], 1, opts.svd);
    vtil.row(static_cast<Eigen::Index>(s)) =
        wv(i) * trip.right.col(0).transpose();
  }

  const SvdTriplet trip = truncated_svd(vtil, k, opts.svd);
  SubspaceEstimate out;
  out.vectors = trip.right;
  out.singular_values = trip.singular_values;
  out.method = Method::SvdStack;
  out.weighting = Weighting::Custom;
  canonicalize_signs(out.vectors);
  return out;
}

SubspaceEstimate svd_stack(const TableSet& tables, int k,
                           const EstimatorOptions& opts) {
  SubspaceEstimate out =
      svd_stack(tables, WeightVector::ones(tables.m()), k, opts);
  out.weighting = Weighting::Unweighted;
  return out;
}

// ===================== rank-r estimators =====================

SubspaceEstimate stack_svd_rank_r(const TableSet& tables,
                                  const ProblemSpec& spec,
                                  const EstimatorOptions& opts) {
  tables.validate();
  validate_spec(spec);
  if (spec.m() != tables.m())
    fail(ErrorCode::ShapeMismatch,
         "spec covers " + std::to_string(spec.m()) + " tables, data has " +
             std::to_string(tables.m()));
  TableSet storage;
  const TableSet& data = maybe_preprocess(tables, opts, storage);
  const int r = spec.rank();

  SubspaceEstimate out;
  out.vectors.resize(data.d, r);
  out.singular_values.resize(r);
  out.method = Method::StackSvd;
  out.weighting = Weighting::Weighted;

  for (int j = 0; j < r; ++j) {
    const ComponentBookkeeping bk = rank_r_weight_bookkeeping(spec, j);
    const StackPlan plan = plan_stack(data, bk.weights);
    if (plan.included.empty())
      fail(ErrorCode::ShapeMismatch,
           "component " + std::to_string(j) + " has zero weight everywhere");
    // The target component surfaces as the l_j-th singular triplet of its
    // weighted stack.
    const SvdTriplet trip = stacked_svd(data, plan, bk.rank_index, opts.svd);
    out.vectors.col(j) = trip.right.col(bk.rank_index - 1);
    out.singular_values(j) = trip.singular_values(bk.rank_index - 1);
  }
  canonicalize_signs(out.vectors);
  return out;
}

SubspaceEstimate svd_stack_rank_r(const TableSet& tables,
                                  const ProblemSpec& spec,
                                  const EstimatorOptions& opts) {
  tables.validate();
  validate_spec(spec);
  if (spec.m() != tables.m())
    fail(ErrorCode::ShapeMismatch,
         "spec covers " + std::to_string(spec.m()) + " tables, data has " +
             std::to_string(tables.m()));
  TableSet storage;
  const TableSet& data = maybe_preprocess(tables, opts, storage);
  const int r = spec.rank();
  const WeightVector w = optimal_weights_svdstack(spec);

  Eigen::MatrixXd vtil(static_cast<Eigen::Index>(data.m()) * r, data.d);
  for (int i = 0; i < data.m(); ++i) {
    const SvdTriplet trip =
        truncated_svd(data.tables[static_cast<size_t>(i)], r, opts.svd);
    for (int j = 0; j < r; ++j)
      vtil.row(static_cast<Eigen::Index>(i) * r + j) =
          w.w(i, j) * trip.right.col(j).transpose();
  }

  const SvdTriplet trip = truncated_svd(vtil, r, opts.svd);
  SubspaceEstimate out;
  out.vectors = trip.right;
  out.singular_values = trip.singular_values;
  out.method = Method::SvdStack;
  out.weighting = Weighting::Weighted;
  canonicalize_signs(out.vectors);
  return out;
}

// ===================== signal-strength estimation =====================

ThetaEstimate estimate_theta_above_threshold(const Eigen::MatrixXd& table,
                                             double c, double edge_margin,
                                             const EstimatorOptions& opts) {
  if (!(c > 0.0))
    fail(ErrorCode::NonPositiveAspectRatio,
         "aspect ratio must be positive, got " + std::to_string(c));
  const Eigen::MatrixXd data =
      (opts.center_columns || opts.rescale_noise)
          ? transform_table(table, opts, table.cols())
          : table;
  const SvdTriplet trip = truncated_svd(data, 1, opts.svd);
  const double s2 = trip.singular_values(0) * trip.singular_values(0);
  const double theta = theta_from_sigma1_sq(s2, c, edge_margin);

  ThetaEstimate out;
  out.theta_hat = Eigen::VectorXd::Constant(1, theta);
  out.beta_hat = Eigen::VectorXd::Constant(1, beta_hat_from_theta(theta, c));
  out.method = ThetaMethod::AboveThresholdQuadratic;
  return out;
}

ThetaEstimate estimate_theta_cross_table(const Eigen::MatrixXd& reference,
                                         double c_ref,
                                         const Eigen::MatrixXd& target,
                                         double c_tgt, double edge_margin,
                                         const EstimatorOptions& opts) {
  if (!(c_ref > 0.0) || !(c_tgt > 0.0))
    fail(ErrorCode::NonPositiveAspectRatio, "aspect ratios must be positive");
  if (reference.cols() != target.cols())
    fail(ErrorCode::ShapeMismatch,
         "reference has " + std::to_string(reference.cols()) +
             " columns, target has " + std::to_string(target.cols()));

  const Eigen::MatrixXd ref_data =
      (opts.center_columns || opts.rescale_noise)
          ? transform_table(reference, opts, reference.cols())
          : reference;
  const SvdTriplet trip = truncated_svd(ref_data, 1, opts.svd);
  const double s2 = trip.singular_values(0) * trip.singular_values(0);
  double theta_ref = 0.0;
  try {
    theta_ref = theta_from_sigma1_sq(s2, c_ref, edge_margin);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoOutlierSingularValue)
      fail(ErrorCode::ReferenceBelowThreshold,
           std::string("reference table is below threshold: ") + e.what());
    throw;
  }
  const double beta_ref = beta_hat_from_theta(theta_ref, c_ref);
  if (!(beta_ref > 0.0))
    fail(ErrorCode::ReferenceBelowThreshold,
         "reference table has vanishing estimated overlap");

  const Eigen::MatrixXd tgt_data =
      (opts.center_columns || opts.rescale_noise)
          ? transform_table(target, opts, target.cols())
          : target;
  // || X_tgt vhat_ref ||^2 -> theta_tgt^2 beta_ref^2 + c_tgt; the clamp
  // absorbs finite-sample undershoot for weak targets.
  const double q = (tgt_data * trip.right.col(0)).squaredNorm();
  const double theta = std::sqrt(std::max(q - c_tgt, 0.0)) / beta_ref;

  ThetaEstimate out;
  out.theta_hat = Eigen::VectorXd::Constant(1, theta);
  out.beta_hat = Eigen::VectorXd::Constant(1, beta_hat_from_theta(theta, c_tgt));
  out.method = ThetaMethod::CrossTable;
  return out;
}

// ===================== data-driven weights =====================

AutoWeightsResult auto_weights(const TableSet& tables, Method method,
                               double edge_margin,
                               const EstimatorOptions& opts) {
  tables.validate();
  TableSet storage;
  const TableSet& data = maybe_preprocess(tables, opts, storage);
  const int m = data.m();
  const Eigen::VectorXd c = data.aspect_ratios();

  // Top singular triplet per table; kept for the cross-table pass.
  std::vector<SvdTriplet> trips(static_cast<size_t>(m));
  Eigen::VectorXd s2(m), edge_ratio(m);
  for (int i = 0; i < m; ++i) {
    trips[static_cast<size_t>(i)] =
        truncated_svd(data.tables[static_cast<size_t>(i)], 1, opts.svd);
    const double s = trips[static_cast<size_t>(i)].singular_values(0);
    s2(i) = s * s;
    const double edge = (1.0 + std::sqrt(c(i))) * (1.0 + std::sqrt(c(i)));
    edge_ratio(i) = s2(i) / edge;
  }

  int ref = -1;
  edge_ratio.maxCoeff(&ref);
  {
    const double edge = (1.0 + std::sqrt(c(ref))) * (1.0 + std::sqrt(c(ref)));
    if (!(s2(ref) > edge + edge_margin))
      fail(ErrorCode::AllTablesBelowThreshold,
           "no table's top singular value clears its bulk edge");
  }

  AutoWeightsResult out;
  out.theta_hat.setZero(m);
  out.beta_hat.setZero(m);
  out.method.assign(static_cast<size_t>(m),
                    ThetaMethod::AboveThresholdQuadratic);
  out.reference = ref;

  const double theta_ref = theta_from_sigma1_sq(s2(ref), c(ref), edge_margin);
  const double beta_ref = beta_hat_from_theta(theta_ref, c(ref));
  const Eigen::VectorXd vref = trips[static_cast<size_t>(ref)].right.col(0);

  for (int i = 0; i < m; ++i) {
    const double edge = (1.0 + std::sqrt(c(i))) * (1.0 + std::sqrt(c(i)));
    if (s2(i) > edge + edge_margin) {
      out.theta_hat(i) = theta_from_sigma1_sq(s2(i), c(i), edge_margin);
    } else {
      const double q =
          (data.tables[static_cast<size_t>(i)] * vref).squaredNorm();
      out.theta_hat(i) = std::sqrt(std::max(q - c(i), 0.0)) / beta_ref;
      out.method[static_cast<size_t>(i)] = ThetaMethod::CrossTable;
    }
    out.beta_hat(i) = beta_hat_from_theta(out.theta_hat(i), c(i));
  }

  out.weights.w.resize(m, 1);
  for (int i = 0; i < m; ++i) {
    const double t = out.theta_hat(i), t2 = t * t;
    out.weights.w(i, 0) = method == Method::StackSvd
                              ? t / std::sqrt(t2 + c(i))
                              : t * std::sqrt((t2 + 1.0) / (t2 + c(i)));
  }
  return out;
}

}  // namespace ssvd
