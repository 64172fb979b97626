// Data generation, the count pipeline, and the Monte Carlo harness.

#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ssvd/estimators.hpp"
#include "ssvd/linalg.hpp"
#include "ssvd/model.hpp"
#include "ssvd/rng.hpp"
#include "ssvd/simulate.hpp"
#include "ssvd/theory.hpp"

using ssvd::ProblemSpec;
using ssvd::TableSet;

namespace {

ProblemSpec spec1(std::initializer_list<double> theta,
                  std::initializer_list<double> c) {
  Eigen::VectorXd th(static_cast<Eigen::Index>(theta.size()));
  Eigen::VectorXd cs(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (double t : theta) th(i++) = t;
  i = 0;
  for (double v : c) cs(i++) = v;
  return ProblemSpec::rank1(th, cs);
}

// Per-column sample variance averaged over columns.
double mean_column_variance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const auto centered = x.rowwise() - mu;
  return centered.array().square().colwise().sum().mean() /
         static_cast<double>(x.rows() - 1);
}

// Sparse synthetic counts shared by the pipeline tests.
Eigen::MatrixXd sparse_counts(int n, int d, double rate, std::uint64_t seed) {
  ssvd::Rng rng(seed);
  Eigen::MatrixXd counts(n, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i)
      counts(i, j) = static_cast<double>(rng.poisson(rate));
  return counts;
}

}  // namespace

// ===================== generation =====================

TEST_CASE("pure noise carries Frobenius mass n_i") {
  const auto [tables, truth] = ssvd::generate_tables(
      spec1({0.0, 0.0}, {0.7, 1.4}), 1000, ssvd::NoiseSpec{}, 3);
  CHECK(tables.tables[0].rows() == 700);
  CHECK(tables.tables[1].rows() == 1400);
  for (int i = 0; i < 2; ++i) {
    const double mass = tables.tables[i].squaredNorm();
    const double n = static_cast<double>(tables.tables[i].rows());
    CHECK(std::abs(mass - n) / n < 0.05);
  }
}

TEST_CASE("generation is bitwise reproducible") {
  const ProblemSpec spec = spec1({1.5, 0.9}, {1.0, 0.5});
  const auto a = ssvd::generate_tables(spec, 200, ssvd::NoiseSpec{}, 77);
  const auto b = ssvd::generate_tables(spec, 200, ssvd::NoiseSpec{}, 77);
  for (int i = 0; i < 2; ++i)
    CHECK((a.first.tables[i].array() == b.first.tables[i].array()).all());
  CHECK((a.second.v.array() == b.second.v.array()).all());

  const auto c = ssvd::generate_tables(spec, 200, ssvd::NoiseSpec{}, 78);
  CHECK_FALSE((a.first.tables[0].array() == c.first.tables[0].array()).all());
}

TEST_CASE("top singular value matches its limit") {
  // theta = 2, c = 1: sigma_1^2 -> theta^2 + 1 + c + c/theta^2 = 6.25.
  const ProblemSpec spec = spec1({2.0}, {1.0});
  ssvd::SvdOptions opts;
  opts.tol = 1e-6;  // sigma_1 alone converges long before the vectors
  double acc = 0.0;
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    const auto [tables, truth] =
        ssvd::generate_tables(spec, 2000, ssvd::NoiseSpec{}, 1000 + rep);
    const auto svd = ssvd::truncated_svd(tables.tables[0], 1, opts);
    const double s = svd.singular_values(0);
    acc += s * s;
  }
  CHECK(acc / reps == doctest::Approx(6.25).epsilon(0.1 / 6.25));
}

TEST_CASE("alternative noise families are variance normalized") {
  for (ssvd::NoiseFamily family :
       {ssvd::NoiseFamily::CenteredExponential, ssvd::NoiseFamily::Rademacher}) {
    ssvd::NoiseSpec noise;
    noise.family = family;
    const auto [tables, truth] =
        ssvd::generate_tables(spec1({0.0}, {1.0}), 600, noise, 5);
    const double mass = tables.tables[0].squaredNorm();
    CHECK(std::abs(mass - 600.0) / 600.0 < 0.05);
  }

  // Rademacher entries are exactly +-1/sqrt(d) under theta = 0.
  ssvd::NoiseSpec rad;
  rad.family = ssvd::NoiseFamily::Rademacher;
  const auto [tables, truth] =
      ssvd::generate_tables(spec1({0.0}, {1.0}), 64, rad, 9);
  const double scale = 1.0 / std::sqrt(64.0);
  CHECK((tables.tables[0].array().abs() - scale).abs().maxCoeff() < 1e-15);
}

TEST_CASE("noise family names round-trip") {
  for (ssvd::NoiseFamily family :
       {ssvd::NoiseFamily::Gaussian, ssvd::NoiseFamily::CenteredExponential,
        ssvd::NoiseFamily::Rademacher})
    CHECK(ssvd::noise_family_from_name(ssvd::noise_family_name(family)) ==
          family);
  try {
    ssvd::noise_family_from_name("cauchy");
    FAIL("expected ConfigError");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::ConfigError);
  }
}

TEST_CASE("random spec sampler reproduces its distribution") {
  const ProblemSpec spec = ssvd::sample_random_spec(0.0, 10000, 21);
  std::vector<double> ratio(10000);
  for (int i = 0; i < 10000; ++i) {
    CHECK(spec.c(i) > 1e-4);  // c^{1/4} >= 0.1 support bound
    ratio[static_cast<size_t>(i)] =
        spec.theta(i, 0) / std::pow(spec.c(i), 0.25);
  }
  std::nth_element(ratio.begin(), ratio.begin() + 5000, ratio.end());
  CHECK(ratio[5000] == doctest::Approx(1.0).epsilon(0.05));

  const ProblemSpec again = ssvd::sample_random_spec(0.0, 10000, 21);
  CHECK((spec.theta.array() == again.theta.array()).all());
}

// ===================== count pipeline =====================

TEST_CASE("count pipeline applies the exact transform") {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 4);
  counts(0, 0) = 4.0;
  counts(1, 2) = 9.0;
  const TableSet out =
      ssvd::count_pipeline(counts, {0.0}, 1, 11, /*center_columns=*/false);
  REQUIRE(out.tables.size() == 1);
  // Rows are shuffled; compare against the transform of the sorted mass.
  const Eigen::MatrixXd expect = 2.0 * (counts / 4.0).cwiseSqrt();
  CHECK(out.tables[0].squaredNorm() ==
        doctest::Approx(expect.squaredNorm()).epsilon(1e-14));
  CHECK(out.tables[0].maxCoeff() == doctest::Approx(3.0).epsilon(1e-14));

  // Entry Y = 4 at d = 1600 transforms to exactly 0.1.
  Eigen::MatrixXd wide = Eigen::MatrixXd::Zero(2, 1600);
  wide(0, 0) = 4.0;
  const TableSet w = ssvd::count_pipeline(wide, {0.0}, 1, 11, false);
  CHECK(w.tables[0].maxCoeff() == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("count pipeline validates its inputs") {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(4, 3);

  counts(1, 1) = -2.0;
  try {
    ssvd::count_pipeline(counts, {0.0}, 1, 1);
    FAIL("expected NegativeCounts");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::NegativeCounts);
  }

  counts(1, 1) = 2.0;
  try {
    ssvd::count_pipeline(counts, {1.0, 2.0}, 3, 1);  // rate/split mismatch
    FAIL("expected ShapeMismatch");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::ShapeMismatch);
  }

  try {
    ssvd::count_pipeline(counts, {}, 0, 1);
    FAIL("expected InvalidPlan");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::InvalidPlan);
  }
}

TEST_CASE("count pipeline splits rows into disjoint blocks") {
  const Eigen::MatrixXd counts = sparse_counts(11, 5, 2.0, 13);
  const TableSet out = ssvd::count_pipeline(counts, {0.0, 0.0, 0.0}, 3, 17,
                                            /*center_columns=*/false);
  REQUIRE(out.tables.size() == 3);
  // 11 rows into 3 blocks: sizes 4, 4, 3; total mass preserved (lambda = 0).
  CHECK(out.tables[0].rows() + out.tables[1].rows() + out.tables[2].rows() ==
        11);
  double mass = 0.0;
  for (const auto& t : out.tables) mass += (t.array() / 2.0).square().sum();
  CHECK(mass * 5.0 == doctest::Approx(counts.sum()).epsilon(1e-12));
}

TEST_CASE("ambient noise floor behaves like model noise") {
  // Sparse base counts: ambient Poisson noise raises the per-column variance
  // over the no-ambient pipeline, the raw energy grows with the rate, and the
  // variance-stabilized floor lands on the model's 1/d once the rate is large.
  const int n = 400, d = 300;
  const Eigen::MatrixXd counts = sparse_counts(n, d, 0.05, 19);

  const double quiet = mean_column_variance(
      ssvd::count_pipeline(counts, {0.0}, 1, 23, false).tables[0]);
  const double noisy = mean_column_variance(
      ssvd::count_pipeline(counts, {10.0}, 1, 23, false).tables[0]);
  CHECK(noisy > 2.0 * quiet);

  double prev_energy = 0.0;
  for (double lambda : {10.0, 50.0, 1000.0}) {
    const TableSet out = ssvd::count_pipeline(counts, {lambda}, 1, 23, false);
    const double energy = out.tables[0].array().square().mean();
    CHECK(energy > prev_energy);
    prev_energy = energy;
    // Delta method: Var(2 sqrt(Y/d)) -> 1/d as the rate grows.
    const double floor = mean_column_variance(out.tables[0]);
    if (lambda >= 1000.0)
      CHECK(floor == doctest::Approx(1.0 / d).epsilon(0.05));
  }
}

// ===================== experiment harness =====================

TEST_CASE("resize_tables truncates and extends") {
  const ProblemSpec spec = spec1({2.0, 1.5, 1.2}, {1.0, 0.8, 0.6});

  const ProblemSpec cut = ssvd::resize_tables(spec, 2);
  CHECK(cut.m() == 2);
  CHECK(cut.theta(1, 0) == 1.5);
  CHECK(cut.c(1) == 0.8);

  const ProblemSpec grown = ssvd::resize_tables(spec, 5);
  CHECK(grown.m() == 5);
  CHECK(grown.theta(4, 0) == 1.2);  // last row replicated
  CHECK(grown.c(4) == 0.6);

  try {
    ssvd::resize_tables(spec, 0);
    FAIL("expected InvalidPlan");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::InvalidPlan);
  }
}

TEST_CASE("run_experiment validates its plan") {
  ssvd::ExperimentPlan plan;
  plan.spec = spec1({2.0, 2.0}, {1.0, 1.0});
  plan.d_grid = {100};
  plan.methods = {ssvd::SimMethod::StackSvd};

  {
    auto bad = plan;
    bad.replicates = 0;
    try {
      ssvd::run_experiment(bad);
      FAIL("expected InvalidPlan");
    } catch (const ssvd::Error& e) {
      CHECK(e.code() == ssvd::ErrorCode::InvalidPlan);
    }
  }
  {
    auto bad = plan;
    bad.d_grid.clear();
    try {
      ssvd::run_experiment(bad);
      FAIL("expected InvalidPlan");
    } catch (const ssvd::Error& e) {
      CHECK(e.code() == ssvd::ErrorCode::InvalidPlan);
    }
  }
  {
    auto bad = plan;
    bad.methods.clear();
    try {
      ssvd::run_experiment(bad);
      FAIL("expected InvalidPlan");
    } catch (const ssvd::Error& e) {
      CHECK(e.code() == ssvd::ErrorCode::InvalidPlan);
    }
  }
  {
    auto bad = plan;
    Eigen::MatrixXd th(2, 2);
    th << 2.0, 1.0, 2.0, 1.0;
    bad.spec.theta = th;  // rank-2 spec under a rank-1 method
    try {
      ssvd::run_experiment(bad);
      FAIL("expected InvalidPlan");
    } catch (const ssvd::Error& e) {
      CHECK(e.code() == ssvd::ErrorCode::InvalidPlan);
    }
  }
  {
    auto bad = plan;
    bad.methods = {ssvd::SimMethod::SvdStackSingle};
    bad.single_table_index = 2;
    try {
      ssvd::run_experiment(bad);
      FAIL("expected InvalidPlan");
    } catch (const ssvd::Error& e) {
      CHECK(e.code() == ssvd::ErrorCode::InvalidPlan);
    }
  }
}

TEST_CASE("run_experiment aggregates against theory") {
  ssvd::ExperimentPlan plan;
  plan.spec = spec1({2.0, 2.0}, {1.0, 1.0});
  plan.d_grid = {150, 300};
  plan.replicates = 4;
  plan.seed = 5;
  plan.methods = {ssvd::SimMethod::StackSvd, ssvd::SimMethod::SvdStackWeighted,
                  ssvd::SimMethod::SvdStackSingle};
  plan.estimator.svd.tol = 1e-7;
  plan.estimator.svd.fail_on_max_iterations = false;

  const auto result = ssvd::run_experiment(plan);
  REQUIRE(result.rows.size() == 6);  // 2 grid points x 3 methods

  for (const auto& row : result.rows) {
    CHECK((row.grid_value == 150.0 || row.grid_value == 300.0));
    CHECK(row.std_err >= 0.0);
    CHECK(row.bias == doctest::Approx(row.mean_overlap - row.theory)
                          .epsilon(1e-12));
    if (row.method == "stack-svd")
      CHECK(row.theory == doctest::Approx(31.0 / 36.0).epsilon(1e-12));
    if (row.method == "svd-stack-weighted")
      CHECK(row.theory ==
            doctest::Approx(ssvd::predict_weighted_svdstack(plan.spec).overlap)
                .epsilon(1e-12));
    if (row.method == "svd-stack-single")
      CHECK(row.theory == doctest::Approx(0.75).epsilon(1e-12));
    // Strong signal: even small d lands in the right neighborhood.
    CHECK(row.mean_overlap == doctest::Approx(row.theory).epsilon(0.25));
  }
}

TEST_CASE("run_experiment sweeps table counts") {
  ssvd::ExperimentPlan plan;
  plan.spec = spec1({1.2}, {1.0});
  plan.grid = ssvd::GridKind::M;
  plan.d_grid = {200};
  plan.m_grid = {2, 6};
  plan.replicates = 3;
  plan.seed = 6;
  plan.methods = {ssvd::SimMethod::StackSvd};
  plan.estimator.svd.fail_on_max_iterations = false;

  const auto result = ssvd::run_experiment(plan);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].grid_value == 2.0);
  CHECK(result.rows[1].grid_value == 6.0);
  for (const auto& row : result.rows) {
    const auto resized =
        ssvd::resize_tables(plan.spec, static_cast<int>(row.grid_value));
    CHECK(row.theory ==
          doctest::Approx(ssvd::predict_unweighted_stacksvd(resized).overlap)
              .epsilon(1e-12));
  }
  CHECK(result.rows[1].theory > result.rows[0].theory);
}

TEST_CASE("identical plans give identical results") {
  ssvd::ExperimentPlan plan;
  plan.spec = spec1({2.0, 1.3}, {1.0, 1.0});
  plan.d_grid = {120, 240};
  plan.replicates = 3;
  plan.seed = 9;
  plan.methods = {ssvd::SimMethod::StackSvd, ssvd::SimMethod::StackSvdWeighted,
                  ssvd::SimMethod::StackSvdBinary, ssvd::SimMethod::SvdStack};

  const auto a = ssvd::run_experiment(plan);
  const auto b = ssvd::run_experiment(plan);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].grid_value == b.rows[i].grid_value);
    CHECK(a.rows[i].method == b.rows[i].method);
    CHECK(a.rows[i].mean_overlap == b.rows[i].mean_overlap);  // bitwise
    CHECK(a.rows[i].std_err == b.rows[i].std_err);
    CHECK(a.rows[i].theory == b.rows[i].theory);
    CHECK(a.rows[i].bias == b.rows[i].bias);
  }
}

TEST_CASE("bias shrinks as dimensions grow") {
  ssvd::ExperimentPlan plan;
  plan.spec = spec1({2.0, 1.3}, {1.0, 1.0});
  plan.d_grid = {200, 1000};
  plan.replicates = 8;
  plan.seed = 12;
  plan.methods = {ssvd::SimMethod::StackSvdWeighted};
  plan.estimator.svd.tol = 1e-6;
  plan.estimator.svd.fail_on_max_iterations = false;

  const auto result = ssvd::run_experiment(plan);
  REQUIRE(result.rows.size() == 2);
  CHECK(std::abs(result.rows[1].bias) < std::abs(result.rows[0].bias));
  CHECK(result.rows[1].mean_overlap ==
        doctest::Approx(result.rows[1].theory).epsilon(0.05));
}

TEST_CASE("rank-r methods run through the harness") {
  Eigen::MatrixXd th(2, 2);
  th << 2.0, 1.5, 2.0, 1.5;
  ssvd::ExperimentPlan plan;
  plan.spec.theta = th;
  plan.spec.c = Eigen::VectorXd::Ones(2);
  plan.d_grid = {300};
  plan.replicates = 3;
  plan.seed = 15;
  plan.methods = {ssvd::SimMethod::StackSvdRankR, ssvd::SimMethod::SvdStackRankR};
  plan.estimator.svd.fail_on_max_iterations = false;

  const auto result = ssvd::run_experiment(plan);
  REQUIRE(result.rows.size() == 2);
  const auto pred = ssvd::predict_rank_r(plan.spec);
  for (const auto& row : result.rows) {
    if (row.method == "stack-svd-rank-r")
      CHECK(row.theory == doctest::Approx(pred.stacksvd_total).epsilon(1e-12));
    if (row.method == "svd-stack-rank-r")
      CHECK(row.theory == doctest::Approx(pred.svdstack_total).epsilon(1e-12));
    CHECK(row.mean_overlap == doctest::Approx(row.theory).epsilon(0.2));
  }
}
