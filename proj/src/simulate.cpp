#include "ssvd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>
#include <utility>
#include <vector>

#include "ssvd/errors.hpp"
#include "ssvd/linalg.hpp"

namespace ssvd {

namespace {

int thread_budget() {
  const char* env = std::getenv("SSVD_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

// Fixed sub-stream layout for generate_tables: stream 0 drives V, stream
// i+1 drives table i (U_i first, then its noise).
constexpr std::uint64_t kStreamV = 0;

void fill_noise(Eigen::MatrixXd& x, const NoiseSpec& noise, double inv_sqrt_d,
                Rng& rng) {
  const Eigen::Index n = x.rows(), d = x.cols();
  switch (noise.family) {
    case NoiseFamily::Gaussian:
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          x(i, j) = rng.normal() * inv_sqrt_d;
      break;
    case NoiseFamily::CenteredExponential:
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          x(i, j) = (rng.exponential() - 1.0) * inv_sqrt_d;
      break;
    case NoiseFamily::Rademacher:
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          x(i, j) = rng.rademacher() * inv_sqrt_d;
      break;
  }
}

}  // namespace

const char* noise_family_name(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::CenteredExponential: return "centered-exponential";
    case NoiseFamily::Rademacher: return "rademacher";
  }
  return "unknown";
}

NoiseFamily noise_family_from_name(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::Gaussian;
  if (name == "centered-exponential") return NoiseFamily::CenteredExponential;
  if (name == "rademacher") return NoiseFamily::Rademacher;
  fail(ErrorCode::ConfigError, "unknown noise family '" + name + "'");
}

const char* sim_method_name(SimMethod method) {
  switch (method) {
    case SimMethod::StackSvd: return "stack-svd";
    case SimMethod::StackSvdBinary: return "stack-svd-binary";
    case SimMethod::StackSvdWeighted: return "stack-svd-weighted";
    case SimMethod::SvdStack: return "svd-stack";
    case SimMethod::SvdStackWeighted: return "svd-stack-weighted";
    case SimMethod::SvdStackSingle: return "svd-stack-single";
    case SimMethod::StackSvdRankR: return "stack-svd-rank-r";
    case SimMethod::SvdStackRankR: return "svd-stack-rank-r";
  }
  return "unknown";
}

SimMethod sim_method_from_name(const std::string& name) {
  for (SimMethod m :
       {SimMethod::StackSvd, SimMethod::StackSvdBinary,
        SimMethod::StackSvdWeighted, SimMethod::SvdStack,
        SimMethod::SvdStackWeighted, SimMethod::SvdStackSingle,
        SimMethod::StackSvdRankR, SimMethod::SvdStackRankR}) {
    if (name == sim_method_name(m)) return m;
  }
  fail(ErrorCode::ConfigError, "unknown method '" + name + "'");
}

// ===================== generation =====================

std::pair<TableSet, GroundTruth> generate_tables(const ProblemSpec& spec,
                                                 int d, const NoiseSpec& noise,
                                                 std::uint64_t seed) {
  validate_spec(spec);
  const int r = spec.rank();
  if (d < r)
    fail(ErrorCode::RankTooLarge,
         "d = " + std::to_string(d) + " below rank " + std::to_string(r));

  std::vector<Eigen::Index> n(static_cast<size_t>(spec.m()));
  for (int i = 0; i < spec.m(); ++i) {
    n[static_cast<size_t>(i)] =
        static_cast<Eigen::Index>(std::llround(d * spec.c(i)));
    if (n[static_cast<size_t>(i)] < 1)
      fail(ErrorCode::InvalidPlan,
           "table " + std::to_string(i) + " rounds to zero rows at d = " +
               std::to_string(d));
    if (n[static_cast<size_t>(i)] < r)
      fail(ErrorCode::RankTooLarge,
           "table " + std::to_string(i) + " has fewer rows than rank " +
               std::to_string(r));
  }

  GroundTruth truth;
  {
    Rng rng_v(split_seed(seed, kStreamV));
    truth.v = haar_orthonormal(d, r, rng_v);
  }

  TableSet tables;
  tables.d = d;
  tables.tables.resize(static_cast<size_t>(spec.m()));
  truth.u.resize(static_cast<size_t>(spec.m()));
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  for (int i = 0; i < spec.m(); ++i) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(i) + 1));
    const Eigen::Index ni = n[static_cast<size_t>(i)];
    Eigen::MatrixXd u = haar_orthonormal(ni, r, rng);
    Eigen::MatrixXd& x = tables.tables[static_cast<size_t>(i)];
    x.resize(ni, d);
    fill_noise(x, noise, inv_sqrt_d, rng);
    x.noalias() +=
        (u * spec.theta.row(i).asDiagonal()) * truth.v.transpose();
    truth.u[static_cast<size_t>(i)] = std::move(u);
  }
  return {std::move(tables), std::move(truth)};
}

ProblemSpec sample_random_spec(double mu, int m, std::uint64_t seed) {
  if (m < 1) fail(ErrorCode::InvalidPlan, "need at least one table");
  Rng rng(seed);
  ProblemSpec spec;
  spec.theta.resize(m, 1);
  spec.c.resize(m);
  for (int i = 0; i < m; ++i) {
    const double c4 = rng.exponential() + 0.1;  // c^{1/4}
    spec.c(i) = c4 * c4 * c4 * c4;
    const double w = mu + 0.1 * rng.normal();   // N(mu, 1/100)
    spec.theta(i, 0) = c4 * std::exp(w);
  }
  return spec;
}

TableSet count_pipeline(const Eigen::MatrixXd& counts,
                        const std::vector<double>& ambient_rates, int splits,
                        std::uint64_t seed, bool center_columns) {
  if ((counts.array() < 0.0).any())
    fail(ErrorCode::NegativeCounts, "count matrix has negative entries");
  if (splits < 1)
    fail(ErrorCode::InvalidPlan, "need at least one split");
  if (static_cast<int>(ambient_rates.size()) != splits)
    fail(ErrorCode::ShapeMismatch,
         std::to_string(ambient_rates.size()) + " ambient rates for " +
             std::to_string(splits) + " splits");
  for (double rate : ambient_rates)
    if (!(rate >= 0.0))
      fail(ErrorCode::InvalidPlan, "ambient rates must be nonnegative");
  const Eigen::Index n = counts.rows();
  const Eigen::Index d = counts.cols();
  if (n < splits)
    fail(ErrorCode::InvalidPlan,
         "cannot split " + std::to_string(n) + " rows into " +
             std::to_string(splits) + " blocks");

  // Fisher-Yates row shuffle on its own sub-stream.
  std::vector<Eigen::Index> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  {
    Rng rng(split_seed(seed, 0));
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(
          rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }
  }

  const Eigen::Index base = n / splits, extra = n % splits;
  TableSet out;
  out.d = d;
  Eigen::Index off = 0;
  for (int b = 0; b < splits; ++b) {
    const Eigen::Index rows = base + (b < extra ? 1 : 0);
    Eigen::MatrixXd y(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i)
      y.row(i) = counts.row(perm[static_cast<size_t>(off + i)]);
    off += rows;

    const double lambda = ambient_rates[static_cast<size_t>(b)];
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(b) + 1));
    if (lambda > 0.0) {
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
          y(i, j) += static_cast<double>(rng.poisson(lambda));
    }

    Eigen::MatrixXd x =
        2.0 * (y / static_cast<double>(d)).cwiseSqrt();
    if (center_columns) x.rowwise() -= x.colwise().mean();
    out.tables.push_back(std::move(x));
  }
  return out;
}

// ===================== experiment harness =====================

ProblemSpec resize_tables(const ProblemSpec& spec, int m) {
  validate_spec(spec);
  if (m < 1) fail(ErrorCode::InvalidPlan, "need at least one table");
  ProblemSpec out;
  out.theta.resize(m, spec.rank());
  out.c.resize(m);
  for (int i = 0; i < m; ++i) {
    const int src = std::min(i, spec.m() - 1);
    out.theta.row(i) = spec.theta.row(src);
    out.c(i) = spec.c(src);
  }
  return out;
}

namespace {

bool is_rank_r_method(SimMethod m) {
  return m == SimMethod::StackSvdRankR || m == SimMethod::SvdStackRankR;
}

bool needs_table_trips(SimMethod m) {
  return m == SimMethod::SvdStack || m == SimMethod::SvdStackWeighted ||
         m == SimMethod::SvdStackSingle;
}

double theory_overlap(const ProblemSpec& spec, SimMethod method,
                      int single_index) {
  switch (method) {
    case SimMethod::StackSvd:
      return predict_unweighted_stacksvd(spec).overlap;
    case SimMethod::StackSvdBinary:
      return predict_binary_stacksvd(spec, SubsetRule::Auto).overlap;
    case SimMethod::StackSvdWeighted:
      return predict_weighted_stacksvd(spec).overlap;
    case SimMethod::SvdStack:
      return predict_unweighted_svdstack(spec).overlap;
    case SimMethod::SvdStackWeighted:
      return predict_weighted_svdstack(spec).overlap;
    case SimMethod::SvdStackSingle:
      return beta_from_theta(spec).vector()(single_index);
    case SimMethod::StackSvdRankR:
      return predict_rank_r(spec).stacksvd_total;
    case SimMethod::SvdStackRankR:
      return predict_rank_r(spec).svdstack_total;
  }
  return 0.0;
}

// Per-replicate evaluation of every method on one generated data set.
// SVD-Stack variants share the per-table top singular triplets.
std::vector<double> evaluate_methods(const ExperimentPlan& plan,
                                     const ProblemSpec& spec, int d,
                                     std::uint64_t rep_seed) {
  auto [tables, truth] = generate_tables(spec, d, plan.noise, rep_seed);
  const EstimatorOptions& opts = plan.estimator;

  const bool want_trips =
      std::any_of(plan.methods.begin(), plan.methods.end(), needs_table_trips);
  std::vector<Eigen::VectorXd> vhat;
  if (want_trips) {
    vhat.reserve(tables.tables.size());
    for (const auto& t : tables.tables)
      vhat.push_back(truncated_svd(t, 1, opts.svd).right.col(0));
  }

  const auto rank1_overlap = [&](const Eigen::VectorXd& v) {
    const double dot = v.dot(truth.v.col(0));
    return dot * dot;
  };
  const auto small_stack_top = [&](const Eigen::VectorXd& w) {
    // Rows w_i vhat_i' for w_i > 0; top right singular vector.
    std::vector<int> inc;
    for (int i = 0; i < tables.m(); ++i)
      if (w(i) > 0.0) inc.push_back(i);
    Eigen::MatrixXd vtil(static_cast<Eigen::Index>(inc.size()), tables.d);
    for (size_t s = 0; s < inc.size(); ++s)
      vtil.row(static_cast<Eigen::Index>(s)) =
          w(inc[s]) * vhat[static_cast<size_t>(inc[s])].transpose();
    return truncated_svd(vtil, 1, opts.svd).right.col(0);
  };

  std::vector<double> overlaps;
  overlaps.reserve(plan.methods.size());
  for (SimMethod method : plan.methods) {
    double value = 0.0;
    switch (method) {
      case SimMethod::StackSvd: {
        value = rank1_overlap(stack_svd(tables, 1, opts).vectors.col(0));
        break;
      }
      case SimMethod::StackSvdBinary: {
        // Oracle subset: tables at or above their individual threshold.
        Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.m());
        for (int i = 0; i < spec.m(); ++i)
          if (std::pow(spec.theta(i, 0), 4) >= spec.c(i)) w(i) = 1.0;
        if (w.maxCoeff() > 0.0)
          value = rank1_overlap(
              stack_svd(tables, WeightVector::from_vector(w), 1, opts)
                  .vectors.col(0));
        break;
      }
      case SimMethod::StackSvdWeighted: {
        const WeightVector w = optimal_weights_stacksvd(spec);
        if (w.w.col(0).maxCoeff() > 0.0)
          value = rank1_overlap(
              stack_svd(tables, w, 1, opts).vectors.col(0));
        break;
      }
      case SimMethod::SvdStack: {
        value = rank1_overlap(small_stack_top(Eigen::VectorXd::Ones(spec.m())));
        break;
      }
      case SimMethod::SvdStackWeighted: {
        const WeightVector w = optimal_weights_svdstack(spec);
        if (w.w.col(0).maxCoeff() > 0.0)
          value = rank1_overlap(small_stack_top(w.w.col(0)));
        break;
      }
      case SimMethod::SvdStackSingle: {
        value = rank1_overlap(vhat[static_cast<size_t>(
            plan.single_table_index)]);
        break;
      }
      case SimMethod::StackSvdRankR: {
        const SubspaceEstimate est = stack_svd_rank_r(tables, spec, opts);
        value = alignment(est, truth).frobenius_sq;
        break;
      }
      case SimMethod::SvdStackRankR: {
        const SubspaceEstimate est = svd_stack_rank_r(tables, spec, opts);
        value = alignment(est, truth).frobenius_sq;
        break;
      }
    }
    overlaps.push_back(value);
  }
  return overlaps;
}

void validate_plan(const ExperimentPlan& plan) {
  validate_spec(plan.spec);
  if (plan.replicates < 1)
    fail(ErrorCode::InvalidPlan, "replicates must be >= 1");
  if (plan.methods.empty())
    fail(ErrorCode::InvalidPlan, "no methods requested");
  if (plan.d_grid.empty())
    fail(ErrorCode::InvalidPlan, "d grid is empty");
  for (int d : plan.d_grid)
    if (d < 1) fail(ErrorCode::InvalidPlan, "d must be >= 1");
  if (plan.grid == GridKind::M) {
    if (plan.m_grid.empty())
      fail(ErrorCode::InvalidPlan, "M grid is empty");
    if (plan.d_grid.size() != 1)
      fail(ErrorCode::InvalidPlan, "M grid runs need exactly one d");
    for (int m : plan.m_grid)
      if (m < 1) fail(ErrorCode::InvalidPlan, "M must be >= 1");
  }
  const bool has_rank1_method =
      std::any_of(plan.methods.begin(), plan.methods.end(),
                  [](SimMethod m) { return !is_rank_r_method(m); });
  if (has_rank1_method && plan.spec.rank() != 1)
    fail(ErrorCode::InvalidPlan,
         "rank-1 methods requested on a rank-" +
             std::to_string(plan.spec.rank()) + " spec");
  if (std::count(plan.methods.begin(), plan.methods.end(),
                 SimMethod::SvdStackSingle) > 0) {
    // Must be valid at every grid point, i.e. under the smallest table count.
    const int m_min = plan.grid == GridKind::M
                          ? *std::min_element(plan.m_grid.begin(),
                                              plan.m_grid.end())
                          : plan.spec.m();
    if (plan.single_table_index < 0 || plan.single_table_index >= m_min)
      fail(ErrorCode::InvalidPlan, "single-table index out of range");
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  validate_plan(plan);

  struct GridPoint {
    double value;
    ProblemSpec spec;
    int d;
  };
  std::vector<GridPoint> points;
  if (plan.grid == GridKind::D) {
    for (int d : plan.d_grid)
      points.push_back({static_cast<double>(d), plan.spec, d});
  } else {
    for (int m : plan.m_grid)
      points.push_back({static_cast<double>(m), resize_tables(plan.spec, m),
                        plan.d_grid.front()});
  }

  ExperimentResult result;
  for (size_t gi = 0; gi < points.size(); ++gi) {
    const GridPoint& pt = points[gi];
    const int reps = plan.replicates;
    std::vector<std::vector<double>> samples(
        static_cast<size_t>(reps));

    // Replicates are independent given their counter-derived seeds; fan out
    // over SSVD_THREADS workers, results land in per-replicate slots so the
    // aggregate is schedule-independent.
    const int workers = std::min(thread_budget(), reps);
    const auto run_slice = [&](int start) {
      for (int rep = start; rep < reps; rep += workers) {
        samples[static_cast<size_t>(rep)] = evaluate_methods(
            plan, pt.spec, pt.d,
            split_seed(plan.seed, static_cast<std::uint64_t>(gi),
                       static_cast<std::uint64_t>(rep)));
      }
    };
    if (workers <= 1) {
      run_slice(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers));
      for (int w = 0; w < workers; ++w)
        pool.emplace_back(run_slice, w);
      for (auto& t : pool) t.join();
    }

    for (size_t mi = 0; mi < plan.methods.size(); ++mi) {
      double mean = 0.0;
      for (int rep = 0; rep < reps; ++rep)
        mean += samples[static_cast<size_t>(rep)][mi];
      mean /= reps;
      double var = 0.0;
      for (int rep = 0; rep < reps; ++rep) {
        const double dev = samples[static_cast<size_t>(rep)][mi] - mean;
        var += dev * dev;
      }
      const double se =
          reps > 1 ? std::sqrt(var / (reps - 1)) / std::sqrt(reps) : 0.0;

      ResultRow row;
      row.grid_value = pt.value;
      row.method = sim_method_name(plan.methods[mi]);
      row.mean_overlap = mean;
      row.std_err = se;
      row.theory =
          theory_overlap(pt.spec, plan.methods[mi], plan.single_table_index);
      row.bias = mean - row.theory;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace ssvd
