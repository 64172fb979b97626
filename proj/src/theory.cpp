#include "ssvd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "ssvd/errors.hpp"
#include "ssvd/linalg.hpp"

namespace ssvd {

namespace {

void require_rank1(const ProblemSpec& spec, const char* op) {
  if (spec.rank() != 1)
    fail(ErrorCode::ShapeMismatch,
         std::string(op) + " requires a rank-1 spec, got rank " +
             std::to_string(spec.rank()));
}

// Cor.-2 overlap of the stack restricted to a table subset given the subset
// sums t2 = sum theta_i^2 and cs = sum c_i.
double subset_overlap(double t2, double cs) {
  const double num = t2 * t2 - cs;
  if (!(num > 0.0) || !(t2 > 0.0)) return 0.0;
  return num / (t2 * (t2 + 1.0));
}

}  // namespace

// ===================== beta and A_beta =====================

Eigen::VectorXd BetaVector::vector() const {
  if (beta_sq.cols() != 1)
    fail(ErrorCode::ShapeMismatch, "beta vector view requires rank 1");
  return beta_sq.col(0);
}

Eigen::VectorXd BetaVector::beta() const { return vector().cwiseSqrt(); }

BetaVector beta_from_theta(const ProblemSpec& spec) {
  validate_spec(spec);
  BetaVector out;
  out.beta_sq.setZero(spec.m(), spec.rank());
  for (int i = 0; i < spec.m(); ++i) {
    for (int j = 0; j < spec.rank(); ++j) {
      const double t2 = spec.theta(i, j) * spec.theta(i, j);
      const double t4 = t2 * t2;
      if (t4 > spec.c(i)) out.beta_sq(i, j) = (t4 - spec.c(i)) / (t4 + t2);
    }
  }
  return out;
}

ABetaMatrix build_a_beta(const BetaVector& beta) {
  const Eigen::VectorXd b = beta.beta();
  ABetaMatrix a = b * b.transpose();
  a.diagonal() = Eigen::VectorXd::Ones(b.size());  // bb' diag + (1 - b^2)
  return a;
}

ABetaMatrix build_a_beta(const BetaVector& beta, const WeightVector& w) {
  const Eigen::VectorXd b = beta.beta();
  if (w.w.cols() != 1 || w.w.rows() != b.size())
    fail(ErrorCode::ShapeMismatch, "weight vector does not match table count");
  const Eigen::VectorXd wv = w.w.col(0);
  const Eigen::VectorXd wb = wv.cwiseProduct(b);
  ABetaMatrix a = wb * wb.transpose();
  a.diagonal() = wv.cwiseProduct(wv);  // w^2 b^2 + w^2 (1 - b^2)
  return a;
}

// ===================== unweighted predictors =====================

PredictionReport predict_unweighted_svdstack(const ProblemSpec& spec) {
  require_rank1(spec, "predict_unweighted_svdstack");
  const BetaVector bv = beta_from_theta(spec);
  const Eigen::VectorXd b2 = bv.vector();
  const Eigen::VectorXd b = bv.beta();

  PredictionReport rep;
  rep.method = "svd-stack";
  rep.weights = Eigen::MatrixXd::Ones(spec.m(), 1);

  int informative = 0, last = -1;
  for (int i = 0; i < b2.size(); ++i)
    if (b2(i) > 0.0) ++informative, last = i;

  if (informative == 0) {
    // A_beta = I: the stacked vectors carry no signal at all.
    rep.lambda_max_a_beta = 1.0;
    return rep;
  }
  if (informative == 1) {
    // A_beta = I as well, but a single-table fix recovers beta_1^2.
    rep.lambda_max_a_beta = 1.0;
    rep.degenerate = true;
    rep.detectable = true;
    rep.overlap = b2(last);
    return rep;
  }

  const ABetaMatrix a = build_a_beta(bv);
  const SymEig eig = sym_eig(a);
  const double lam = eig.values(0);
  // With two informative tables the top eigenvalue is simple; a floating tie
  // can only arise from degenerate numerics, which we refuse to paper over.
  if (eig.values.size() > 1 &&
      lam - eig.values(1) <= 1e-15 * std::max(1.0, lam))
    fail(ErrorCode::DegenerateTopEigenvalue,
         "top eigenvalue of A_beta is numerically multiple");
  const double proj = b.dot(eig.vectors.col(0));
  rep.lambda_max_a_beta = lam;
  rep.detectable = true;
  rep.overlap = proj * proj / lam;
  return rep;
}

PredictionReport predict_unweighted_stacksvd(const ProblemSpec& spec) {
  require_rank1(spec, "predict_unweighted_stacksvd");
  const Eigen::VectorXd th = spec.theta_vector();
  const double t2 = th.squaredNorm();
  const double cs = spec.c.sum();

  PredictionReport rep;
  rep.method = "stack-svd";
  rep.weights = Eigen::MatrixXd::Ones(spec.m(), 1);
  rep.overlap = subset_overlap(t2, cs);
  rep.detectable = rep.overlap > 0.0;
  return rep;
}

// ===================== binary predictors =====================

PredictionReport predict_binary_stacksvd(const ProblemSpec& spec,
                                         const std::vector<int>& subset) {
  require_rank1(spec, "predict_binary_stacksvd");
  if (subset.empty())
    fail(ErrorCode::SubsetEmpty, "binary stack-svd subset is empty");
  std::vector<char> seen(static_cast<size_t>(spec.m()), 0);
  for (int i : subset) {
    if (i < 0 || i >= spec.m())
      fail(ErrorCode::ShapeMismatch,
           "subset index " + std::to_string(i) + " out of range");
    if (seen[static_cast<size_t>(i)])
      fail(ErrorCode::ShapeMismatch,
           "subset index " + std::to_string(i) + " repeated");
    seen[static_cast<size_t>(i)] = 1;
  }

  const Eigen::VectorXd th = spec.theta_vector();
  double t2 = 0.0, cs = 0.0;
  for (int i : subset) {
    t2 += th(i) * th(i);
    cs += spec.c(i);
  }

  PredictionReport rep;
  rep.method = "stack-svd-binary";
  rep.subset = subset;
  std::sort(rep.subset.begin(), rep.subset.end());
  rep.weights = Eigen::MatrixXd::Zero(spec.m(), 1);
  for (int i : rep.subset) rep.weights(i, 0) = 1.0;
  rep.overlap = subset_overlap(t2, cs);
  rep.detectable = rep.overlap > 0.0;
  return rep;
}

PredictionReport predict_binary_stacksvd(const ProblemSpec& spec,
                                         SubsetRule rule,
                                         int enumeration_cap) {
  require_rank1(spec, "predict_binary_stacksvd");
  const Eigen::VectorXd th = spec.theta_vector();

  if (rule == SubsetRule::Auto) {
    // Keep tables at or above their individual threshold: theta^4 >= c.
    std::vector<int> keep;
    for (int i = 0; i < spec.m(); ++i) {
      const double t4 = std::pow(th(i), 4);
      if (t4 >= spec.c(i)) keep.push_back(i);
    }
    if (keep.empty()) {
      PredictionReport rep;
      rep.method = "stack-svd-binary";
      rep.weights = Eigen::MatrixXd::Zero(spec.m(), 1);
      return rep;
    }
    return predict_binary_stacksvd(spec, keep);
  }

  // Best: brute-force over nonempty subsets.
  if (spec.m() > enumeration_cap || enumeration_cap > 30)
    fail(ErrorCode::TooManyTablesForEnumeration,
         "subset enumeration supports at most " +
             std::to_string(std::min(enumeration_cap, 30)) + " tables, got " +
             std::to_string(spec.m()));
  const std::uint32_t all = (1u << spec.m()) - 1u;
  double best = -1.0;
  std::uint32_t best_mask = 1u;
  for (std::uint32_t mask = 1u; mask <= all; ++mask) {
    double t2 = 0.0, cs = 0.0;
    for (int i = 0; i < spec.m(); ++i)
      if (mask & (1u << i)) {
        t2 += th(i) * th(i);
        cs += spec.c(i);
      }
    const double val = subset_overlap(t2, cs);
    if (val > best) {
      best = val;
      best_mask = mask;
    }
  }
  std::vector<int> keep;
  for (int i = 0; i < spec.m(); ++i)
    if (best_mask & (1u << i)) keep.push_back(i);
  return predict_binary_stacksvd(spec, keep);
}

// ===================== weighted stack-svd =====================

WeightVector optimal_weights_stacksvd(const ProblemSpec& spec) {
  validate_spec(spec);
  WeightVector w;
  w.w.resize(spec.m(), spec.rank());
  for (int i = 0; i < spec.m(); ++i)
    for (int j = 0; j < spec.rank(); ++j) {
      const double t = spec.theta(i, j);
      w.w(i, j) = t / std::sqrt(t * t + spec.c(i));
    }
  return w;
}

PredictionReport predict_weighted_stacksvd(const ProblemSpec& spec,
                                            double bisect_tol) {
  require_rank1(spec, "predict_weighted_stacksvd");
  const Eigen::VectorXd th = spec.theta_vector();

  PredictionReport rep;
  rep.method = "stack-svd-weighted";
  rep.weights = optimal_weights_stacksvd(spec).w;

  double ratio = 0.0;  // sum theta^4/c
  for (int i = 0; i < spec.m(); ++i)
    ratio += std::pow(th(i), 4) / spec.c(i);
  if (!(ratio > 1.0)) return rep;

  // gamma* is the unique root in (0, 1) of
  //   f(x) = sum_i theta_i^4 (1 - x)/(c_i + x theta_i^2) - 1,
  // strictly decreasing with f(0) = ratio - 1 > 0 and f(1) = -1.
  const auto f = [&](double x) {
    double s = -1.0;
    for (int i = 0; i < spec.m(); ++i) {
      const double t2 = th(i) * th(i);
      s += t2 * t2 * (1.0 - x) / (spec.c(i) + x * t2);
    }
    return s;
  };
  double lo = 0.0, hi = 1.0, mid = 0.5;
  bool done = false;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double val = f(mid);
    if (std::abs(val) <= bisect_tol) {
      done = true;
      break;
    }
    (val > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) {
      done = true;  // bracket exhausted at machine precision
      mid = 0.5 * (lo + hi);
      break;
    }
  }
  if (!done)
    fail(ErrorCode::ConvergenceFailure, "gamma* bisection did not converge");

  rep.detectable = true;
  rep.gamma = mid;
  rep.overlap = mid;
  return rep;
}

// ===================== weighted svd-stack =====================

WeightVector optimal_weights_svdstack(const ProblemSpec& spec) {
  validate_spec(spec);
  WeightVector w;
  w.w.resize(spec.m(), spec.rank());
  for (int i = 0; i < spec.m(); ++i)
    for (int j = 0; j < spec.rank(); ++j) {
      const double t2 = spec.theta(i, j) * spec.theta(i, j);
      w.w(i, j) = spec.theta(i, j) * std::sqrt((t2 + 1.0) / (t2 + spec.c(i)));
    }
  return w;
}

PredictionReport predict_weighted_svdstack(const ProblemSpec& spec) {
  require_rank1(spec, "predict_weighted_svdstack");
  const Eigen::VectorXd b2 = beta_from_theta(spec).vector();

  double s = 0.0;  // S = sum beta^2/(1 - beta^2)
  for (int i = 0; i < spec.m(); ++i) s += b2(i) / (1.0 - b2(i));

  double worst = 0.0;  // max theta^4/c
  for (int i = 0; i < spec.m(); ++i)
    worst = std::max(worst, std::pow(spec.theta(i, 0), 4) / spec.c(i));

  PredictionReport rep;
  rep.method = "svd-stack-weighted";
  rep.weights = optimal_weights_svdstack(spec).w;
  rep.s = s;
  rep.detectable = worst > 1.0;
  rep.overlap = s > 0.0 ? s / (s + 1.0) : 0.0;
  return rep;
}

// ===================== general weighted spectrum =====================

WeightedStackSpectrum eval_general_weighted_stacksvd(const ProblemSpec& spec,
                                                     const WeightVector& w,
                                                     double bisect_tol) {
  require_rank1(spec, "eval_general_weighted_stacksvd");
  w.validate();
  if (w.w.cols() != 1 || w.w.rows() != spec.m())
    fail(ErrorCode::ShapeMismatch, "weight vector does not match table count");
  const Eigen::VectorXd th = spec.theta_vector();
  const Eigen::VectorXd wv = w.w.col(0);

  // Active terms: theta_i w_i > 0 contribute poles/mass to the secular
  // function f(lambda) = 1 + sum_i theta_i^2 w_i^2/(w_i^2 - lambda).
  double mass = 0.0;  // ||theta o w||^2
  for (int i = 0; i < spec.m(); ++i) mass += th(i) * th(i) * wv(i) * wv(i);
  if (!(mass > 0.0))
    fail(ErrorCode::NoSecularRoot,
         "all theta_i w_i vanish; the secular function has no root");

  const double wmax2 = wv.cwiseAbs2().maxCoeff();
  const auto f = [&](double lam) {
    double s = 1.0;
    for (int i = 0; i < spec.m(); ++i) {
      const double tw2 = th(i) * th(i) * wv(i) * wv(i);
      if (tw2 > 0.0) s += tw2 / (wv(i) * wv(i) - lam);
    }
    return s;
  };

  WeightedStackSpectrum out;
  double lo = wmax2 + 1e-12 * std::max(1.0, wmax2);
  double hi = wmax2 + mass + 1.0;  // f(hi) >= 1 - mass/(mass + 1) > 0
  if (f(lo) >= 0.0) {
    // No root above the top pole: the population spectrum has no outlier and
    // the weighting recovers nothing.
    out.gamma1 = wmax2;
    out.assumption_check = std::numeric_limits<double>::infinity();
    out.performance = 0.0;
    out.has_outlier = false;
    return out;
  }

  double mid = 0.5 * (lo + hi);
  bool done = false;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double val = f(mid);
    if (std::abs(val) <= bisect_tol) {
      done = true;
      break;
    }
    (val < 0.0 ? lo : hi) = mid;  // f is increasing above the top pole
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(mid))) {
      done = true;  // bracket exhausted at machine precision
      mid = 0.5 * (lo + hi);
      break;
    }
  }
  if (!done)
    fail(ErrorCode::ConvergenceFailure, "secular bisection did not converge");

  const double g = mid;
  double a_check = 0.0, denom = 0.0;
  for (int i = 0; i < spec.m(); ++i) {
    const double w2 = wv(i) * wv(i);
    const double gap = g - w2;
    a_check += spec.c(i) * w2 * w2 / (gap * gap);
    denom += th(i) * th(i) * w2 / (gap * gap);
  }

  out.gamma1 = g;
  out.assumption_check = a_check;
  out.has_outlier = true;
  out.performance = a_check < 1.0 ? (1.0 - a_check) / (g * denom) : 0.0;
  return out;
}

// ===================== thresholds =====================

ThresholdReport detection_thresholds(const ProblemSpec& spec) {
  require_rank1(spec, "detection_thresholds");
  const Eigen::VectorXd th = spec.theta_vector();
  const Eigen::VectorXd b2 = beta_from_theta(spec).vector();

  ThresholdReport rep;

  // SVD-Stack (unweighted): needs at least two informative tables.
  Eigen::VectorXd sorted = b2;
  std::sort(sorted.data(), sorted.data() + sorted.size(),
            std::greater<double>());
  const double b2nd = sorted.size() > 1 ? sorted(1) : 0.0;
  rep.svdstack_margin = std::sqrt(b2nd);
  rep.svdstack = b2nd > 0.0;

  // SVD-Stack (weighted): one table above its own threshold suffices.
  double worst = 0.0;
  for (int i = 0; i < spec.m(); ++i)
    worst = std::max(worst, std::pow(th(i), 4) / spec.c(i));
  rep.svdstack_weighted_margin = worst - 1.0;
  rep.svdstack_weighted = worst > 1.0;

  // Stack-SVD (unweighted): aggregate signal vs aggregate noise.
  const double t2 = th.squaredNorm();
  rep.stacksvd_margin = t2 * t2 - spec.c.sum();
  rep.stacksvd = rep.stacksvd_margin > 0.0;

  // Stack-SVD (weighted): sum of per-table SNRs.
  double ratio = 0.0;
  for (int i = 0; i < spec.m(); ++i)
    ratio += std::pow(th(i), 4) / spec.c(i);
  rep.stacksvd_weighted_margin = ratio - 1.0;
  rep.stacksvd_weighted = ratio > 1.0;

  // Stack-SVD (binary, auto subset).
  double st2 = 0.0, scs = 0.0;
  bool any = false;
  for (int i = 0; i < spec.m(); ++i)
    if (std::pow(th(i), 4) >= spec.c(i)) {
      st2 += th(i) * th(i);
      scs += spec.c(i);
      any = true;
    }
  rep.stacksvd_binary_auto_margin = any ? st2 * st2 - scs : 0.0;
  rep.stacksvd_binary_auto = rep.stacksvd_binary_auto_margin > 0.0;

  return rep;
}

// ===================== rank r =====================

RankRPrediction predict_rank_r(const ProblemSpec& spec, double bisect_tol) {
  validate_spec(spec);
  const int r = spec.rank();
  RankRPrediction out;
  out.gamma.setZero(r);
  out.s.setZero(r);
  out.stacksvd_overlap.setZero(r);
  out.svdstack_overlap.setZero(r);
  out.stacksvd_detectable.assign(static_cast<size_t>(r), false);
  out.svdstack_detectable.assign(static_cast<size_t>(r), false);

  for (int j = 0; j < r; ++j) {
    ProblemSpec sub = ProblemSpec::rank1(spec.theta.col(j), spec.c);
    const PredictionReport ss = predict_weighted_stacksvd(sub, bisect_tol);
    const PredictionReport vs = predict_weighted_svdstack(sub);
    out.gamma(j) = ss.detectable ? ss.gamma : 0.0;
    out.stacksvd_overlap(j) = ss.overlap;
    out.stacksvd_detectable[static_cast<size_t>(j)] = ss.detectable;
    out.s(j) = vs.s;
    out.svdstack_overlap(j) = vs.overlap;
    out.svdstack_detectable[static_cast<size_t>(j)] = vs.detectable;
    out.stacksvd_total += ss.overlap;
    out.svdstack_total += vs.overlap;
  }
  return out;
}

ComponentBookkeeping rank_r_weight_bookkeeping(const ProblemSpec& spec, int j) {
  validate_spec(spec);
  if (j < 0 || j >= spec.rank())
    fail(ErrorCode::ShapeMismatch,
         "component index " + std::to_string(j) + " out of range");

  ComponentBookkeeping out;
  out.weights.resize(spec.m());
  for (int i = 0; i < spec.m(); ++i) {
    const double t = spec.theta(i, j);
    out.weights(i) = t / std::sqrt(t * t + spec.c(i));
  }

  // Cross strengths in the weighted stack: theta~_{jk}^2 =
  // sum_i theta_ij theta_ik / sqrt(theta_ij^2 + c_i).
  out.cross_strength_sq.setZero(spec.rank());
  for (int k = 0; k < spec.rank(); ++k) {
    double s = 0.0;
    for (int i = 0; i < spec.m(); ++i)
      s += spec.theta(i, j) * spec.theta(i, k) /
           std::sqrt(spec.theta(i, j) * spec.theta(i, j) + spec.c(i));
    out.cross_strength_sq(k) = s;
  }

  // l_j: descending rank of the target strength among all components.
  const double own = out.cross_strength_sq(j);
  int rank_index = 1;
  for (int k = 0; k < spec.rank(); ++k) {
    if (k == j) continue;
    if (out.cross_strength_sq(k) == own)
      fail(ErrorCode::AmbiguousComponentOrder,
           "components " + std::to_string(j) + " and " + std::to_string(k) +
               " have identical cross strengths in the weighted stack");
    if (out.cross_strength_sq(k) > own) ++rank_index;
  }
  out.rank_index = rank_index;
  return out;
}

// ===================== special instances =====================

ProblemSpec inadmissibility_instance(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    fail(ErrorCode::EpsilonOutOfRange,
         "epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  // Euler-Mascheroni constant to 20 significant digits.
  const double gamma_em = 0.57721566490153286061;
  const double m_real = std::ceil(std::exp(-gamma_em) * std::exp(2.0 / epsilon));
  if (!(m_real <= 1e7))
    fail(ErrorCode::EpsilonOutOfRange,
         "epsilon so small the instance would need " +
             std::to_string(m_real) + " tables");
  const int m = static_cast<int>(m_real);

  ProblemSpec spec;
  spec.theta = Eigen::MatrixXd::Ones(m, 1);
  spec.c.resize(m);
  for (int i = 0; i < m; ++i) spec.c(i) = 2.0 * (i + 1) - 1.0;
  validate_spec(spec);
  return spec;
}

}  // namespace ssvd
