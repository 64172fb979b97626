// Golden values and properties of the asymptotic predictors.

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "ssvd/linalg.hpp"
#include "ssvd/model.hpp"
#include "ssvd/theory.hpp"

using ssvd::ProblemSpec;

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

// Random rank-1 spec in the regime used by the property suites.
ProblemSpec random_spec(std::mt19937_64& gen, int max_m = 8,
                        double c_max = 5.0) {
  std::uniform_int_distribution<int> md(1, max_m);
  std::normal_distribution<double> td(0.0, 2.0);
  std::uniform_real_distribution<double> cd(0.2, c_max);
  const int m = md(gen);
  Eigen::VectorXd th(m), cs(m);
  for (int i = 0; i < m; ++i) {
    th(i) = std::abs(td(gen));
    cs(i) = cd(gen);
  }
  return ProblemSpec::rank1(th, cs);
}

}  // namespace

// ===================== beta and A_beta =====================

TEST_CASE("beta_from_theta golden values") {
  const Eigen::VectorXd b2 =
      ssvd::beta_from_theta(spec1({2.0, std::sqrt(5.0), 4.0}, {1.0, 1.0, 38.4}))
          .vector();
  CHECK(b2(0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(b2(1) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(b2(2) == doctest::Approx(217.6 / 272.0).epsilon(1e-9));
}

TEST_CASE("beta is zero at and below the threshold") {
  // Exactly at the boundary theta = c^{1/4} the formula value is 0.
  const double t = std::pow(2.7, 0.25);
  const Eigen::VectorXd b2 =
      ssvd::beta_from_theta(spec1({t, 0.5, 0.0}, {2.7, 1.0, 1.0})).vector();
  CHECK(b2(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b2(1) == 0.0);
  CHECK(b2(2) == 0.0);
}

TEST_CASE("build_a_beta forms") {
  const ssvd::BetaVector zero =
      ssvd::beta_from_theta(spec1({0.0, 0.0}, {1.0, 1.0}));
  CHECK(ssvd::build_a_beta(zero).isApprox(Eigen::MatrixXd::Identity(2, 2)));

  const ssvd::BetaVector b =
      ssvd::beta_from_theta(spec1({2.0, 2.0, 2.0}, {1.0, 1.0, 1.0}));
  const Eigen::MatrixXd a = ssvd::build_a_beta(b);
  CHECK(a(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(a(1, 2) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(a.isApprox(a.transpose()));

  // Weighted: beta^2 = 0.75 with w = 1/sqrt(1 - beta^2) = 2 gives
  // [[4,3],[3,4]] whose top eigenvalue is 7.
  const ssvd::BetaVector b2 =
      ssvd::beta_from_theta(spec1({2.0, 2.0}, {1.0, 1.0}));
  const Eigen::MatrixXd aw = ssvd::build_a_beta(
      b2, ssvd::WeightVector::from_vector(Eigen::Vector2d(2.0, 2.0)));
  CHECK(aw(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(aw(0, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ssvd::sym_eig(aw).values(0) == doctest::Approx(7.0).epsilon(1e-12));
}

// ===================== unweighted predictors =====================

TEST_CASE("unweighted svd-stack golden values") {
  const auto rep = ssvd::predict_unweighted_svdstack(spec1({2, 2}, {1, 1}));
  CHECK(rep.overlap == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(rep.detectable);
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.lambda_max_a_beta == doctest::Approx(1.75).epsilon(1e-12));

  const auto rep2 = ssvd::predict_unweighted_svdstack(
      spec1({std::sqrt(5.0), std::sqrt(5.0)}, {1, 1}));
  CHECK(rep2.overlap == doctest::Approx(8.0 / 9.0).epsilon(1e-9));
}

TEST_CASE("unweighted svd-stack matches the symmetric closed form") {
  // M identical tables: M(t^4 - c)/(M t^4 + t^2 - (M-1)c).
  for (const auto& [t, c, m] :
       std::vector<std::tuple<double, double, int>>{
           {2.0, 1.0, 2},   {2.0, 1.0, 5},   {1.5, 0.8, 3},
           {1.1, 0.6, 7},   {3.0, 2.5, 4}}) {
    Eigen::VectorXd th = Eigen::VectorXd::Constant(m, t);
    Eigen::VectorXd cs = Eigen::VectorXd::Constant(m, c);
    const auto rep =
        ssvd::predict_unweighted_svdstack(ProblemSpec::rank1(th, cs));
    const double t4 = t * t * t * t;
    const double expected =
        m * (t4 - c) / (m * t4 + t * t - (m - 1) * c);
    CHECK(rep.overlap == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("unweighted svd-stack degenerate cases") {
  // All below threshold: overlap 0, not detectable.
  const auto none = ssvd::predict_unweighted_svdstack(
      spec1({0.5, 0.5}, {1, 1}));
  CHECK(none.overlap == 0.0);
  CHECK_FALSE(none.detectable);
  CHECK_FALSE(none.degenerate);

  // Exactly one informative table: flagged, single-table fix beta^2.
  const auto one = ssvd::predict_unweighted_svdstack(
      spec1({2.0, 0.5, 0.0}, {1, 1, 1}));
  CHECK(one.degenerate);
  CHECK(one.detectable);
  CHECK(one.overlap == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("unweighted stack-svd golden values") {
  // Identical tables at threshold strength: 1 - 2/(M+1).
  for (int m : {2, 3, 5, 12}) {
    Eigen::VectorXd th = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd cs = Eigen::VectorXd::Ones(m);
    const auto rep =
        ssvd::predict_unweighted_stacksvd(ProblemSpec::rank1(th, cs));
    CHECK(rep.overlap ==
          doctest::Approx(1.0 - 2.0 / (m + 1)).epsilon(1e-12));
  }

  CHECK(ssvd::predict_unweighted_stacksvd(spec1({2, 2}, {1, 1})).overlap ==
        doctest::Approx(31.0 / 36.0).epsilon(1e-12));

  // Weak trio: ||theta||^4 = 3.258 < sum c = 4, so no detection.
  const auto weak_trio =
      ssvd::predict_unweighted_stacksvd(spec1({0.95, 0.95, 0.0}, {1, 1, 2}));
  CHECK(weak_trio.overlap == 0.0);
  CHECK_FALSE(weak_trio.detectable);

  CHECK(ssvd::predict_unweighted_stacksvd(spec1({0.0}, {1.0})).overlap == 0.0);
}

// ===================== binary stack-svd =====================

TEST_CASE("binary stack-svd golden value") {
  const auto rep =
      ssvd::predict_binary_stacksvd(spec1({std::sqrt(5.0), 4.0}, {1.0, 38.4}));
  CHECK(rep.overlap == doctest::Approx(401.6 / 462.0).epsilon(1e-9));
  CHECK(rep.overlap == doctest::Approx(0.869).epsilon(1e-3));
  CHECK(rep.subset == std::vector<int>{0, 1});
}

TEST_CASE("binary auto includes the threshold boundary") {
  // theta_3^4 = c_3 exactly; the auto rule keeps it.
  const auto rep =
      ssvd::predict_binary_stacksvd(spec1({2.0, 2.0, 10.0}, {1, 1, 1e4}));
  CHECK(rep.subset == std::vector<int>{0, 1, 2});
  const double expected = (16.0 * 100.0 + 62.0) / (1e4 + 1700.0 + 72.0);
  CHECK(rep.overlap == doctest::Approx(expected).epsilon(1e-9));
  CHECK(rep.overlap == doctest::Approx(0.1412).epsilon(1e-3));
}

TEST_CASE("binary best mode enumerates subsets") {
  // Dropping the huge-aspect table beats the auto rule here.
  const ProblemSpec spec = spec1({2.0, 2.0, 10.0}, {1, 1, 1e4});
  const auto best =
      ssvd::predict_binary_stacksvd(spec, ssvd::SubsetRule::Best);
  CHECK(best.subset == std::vector<int>{0, 1});
  CHECK(best.overlap == doctest::Approx(62.0 / 72.0).epsilon(1e-12));
  CHECK(best.overlap >
        ssvd::predict_binary_stacksvd(spec, ssvd::SubsetRule::Auto).overlap);
}

TEST_CASE("binary edge cases") {
  // Explicit full subset equals the unweighted predictor.
  const ProblemSpec spec = spec1({1.3, 0.9, 1.7}, {1.0, 0.7, 2.1});
  const auto full = ssvd::predict_binary_stacksvd(spec, {0, 1, 2});
  const auto plain = ssvd::predict_unweighted_stacksvd(spec);
  CHECK(full.overlap == doctest::Approx(plain.overlap).epsilon(1e-14));

  // Explicit empty subset is an error; an empty auto subset is a zero report.
  try {
    ssvd::predict_binary_stacksvd(spec, std::vector<int>{});
    FAIL("expected SubsetEmpty");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::SubsetEmpty);
  }
  const auto autoempty =
      ssvd::predict_binary_stacksvd(spec1({0.5, 0.6}, {1, 1}));
  CHECK(autoempty.overlap == 0.0);
  CHECK_FALSE(autoempty.detectable);
  CHECK(autoempty.subset.empty());

  // Out-of-range / duplicate indices are rejected.
  CHECK_THROWS_AS(ssvd::predict_binary_stacksvd(spec, {0, 3}), ssvd::Error);

  // Enumeration cap.
  Eigen::VectorXd th = Eigen::VectorXd::Ones(21);
  Eigen::VectorXd cs = Eigen::VectorXd::Ones(21);
  try {
    ssvd::predict_binary_stacksvd(ProblemSpec::rank1(th, cs),
                                  ssvd::SubsetRule::Best);
    FAIL("expected TooManyTablesForEnumeration");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::TooManyTablesForEnumeration);
  }
}

// ===================== optimal weights =====================

TEST_CASE("optimal weight formulas") {
  const ProblemSpec spec = spec1({0.0, 1.0}, {1.0, 1.0});
  const Eigen::VectorXd ws = ssvd::optimal_weights_stacksvd(spec).vector();
  CHECK(ws(0) == 0.0);
  CHECK(ws(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  const Eigen::VectorXd ws2 =
      ssvd::optimal_weights_stacksvd(spec1({1.0, 1.0}, {1.0, 3.0})).vector();
  CHECK(ws2(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(ws2(1) == doctest::Approx(0.5).epsilon(1e-14));

  // SVD-Stack: above threshold w* = 1/sqrt(1 - beta^2); theta=2, c=1 -> 2.
  const Eigen::VectorXd wv =
      ssvd::optimal_weights_svdstack(spec1({2.0, 0.0}, {1.0, 1.0})).vector();
  CHECK(wv(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(wv(1) == 0.0);

  // Equal aspect ratios c = 1: weights proportional to theta.
  const Eigen::VectorXd wp =
      ssvd::optimal_weights_svdstack(spec1({2.0, 1.0}, {1.0, 1.0})).vector();
  CHECK(wp(0) / wp(1) == doctest::Approx(2.0).epsilon(1e-12));
}

// ===================== weighted predictors =====================

TEST_CASE("weighted stack-svd golden values") {
  // With theta_3 = 0 the defining equation is linear in x, giving the
  // exact root 0.6290125/2.5315125.
  const auto rep =
      ssvd::predict_weighted_stacksvd(spec1({0.95, 0.95, 0.0}, {1, 1, 2}));
  CHECK(rep.detectable);
  CHECK(rep.overlap ==
        doctest::Approx(0.6290125 / 2.5315125).epsilon(1e-9));
  CHECK(rep.overlap == doctest::Approx(0.2485).epsilon(1e-3));
  CHECK(rep.gamma == rep.overlap);

  // Single table: gamma* reduces to beta^2.
  CHECK(ssvd::predict_weighted_stacksvd(spec1({2.0}, {1.0})).overlap ==
        doctest::Approx(0.75).epsilon(1e-9));

  // Boundary sum theta^4/c = 1: not detectable.
  const auto boundary = ssvd::predict_weighted_stacksvd(spec1({1.0}, {1.0}));
  CHECK_FALSE(boundary.detectable);
  CHECK(boundary.overlap == 0.0);
}

TEST_CASE("weighted svd-stack golden values") {
  const auto rep = ssvd::predict_weighted_svdstack(
      spec1({std::sqrt(5.0), std::sqrt(5.0), 0.0}, {1, 1, 2}));
  CHECK(rep.s == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(rep.overlap == doctest::Approx(8.0 / 9.0).epsilon(1e-9));
  CHECK(rep.overlap == doctest::Approx(0.889).epsilon(1e-3));

  CHECK(ssvd::predict_weighted_svdstack(spec1({2, 2}, {1, 1})).overlap ==
        doctest::Approx(6.0 / 7.0).epsilon(1e-12));

  const auto zero = ssvd::predict_weighted_svdstack(spec1({0.5, 0.9}, {1, 1}));
  CHECK(zero.overlap == 0.0);
  CHECK_FALSE(zero.detectable);
}

// ===================== general weighted spectrum =====================

TEST_CASE("general spectrum at w = 1 matches the unweighted closed form") {
  std::mt19937_64 gen(101);
  for (int rep = 0; rep < 200; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    if (spec.theta_vector().maxCoeff() == 0.0) continue;
    const auto s = ssvd::eval_general_weighted_stacksvd(
        spec, ssvd::WeightVector::ones(spec.m()));
    const double t2 = spec.theta_vector().squaredNorm();
    CHECK(s.gamma1 == doctest::Approx(t2 + 1.0).epsilon(1e-9));
    const double plain = ssvd::predict_unweighted_stacksvd(spec).overlap;
    CHECK(s.performance == doctest::Approx(plain).epsilon(1e-9));
  }
}

TEST_CASE("general spectrum at w* matches the bisection root") {
  std::mt19937_64 gen(102);
  for (int rep = 0; rep < 1000; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    if (spec.theta_vector().maxCoeff() == 0.0) continue;
    const auto s = ssvd::eval_general_weighted_stacksvd(
        spec, ssvd::optimal_weights_stacksvd(spec));
    const double gamma = ssvd::predict_weighted_stacksvd(spec).overlap;
    CHECK(s.performance == doctest::Approx(gamma).epsilon(1e-9));
  }
}

TEST_CASE("general spectrum at subset indicators matches the binary formula") {
  std::mt19937_64 gen(103);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int rep = 0; rep < 1000; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    std::vector<int> subset;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.m());
    for (int i = 0; i < spec.m(); ++i)
      if (bit(gen)) {
        subset.push_back(i);
        w(i) = 1.0;
      }
    if (subset.empty()) continue;
    double tmax = 0.0;
    for (int i : subset) tmax = std::max(tmax, spec.theta(i, 0));
    if (tmax == 0.0) continue;  // no secular root without signal mass
    const auto s = ssvd::eval_general_weighted_stacksvd(
        spec, ssvd::WeightVector::from_vector(w));
    const auto binary = ssvd::predict_binary_stacksvd(spec, subset);
    CHECK(s.performance == doctest::Approx(binary.overlap).epsilon(1e-9));
  }
}

TEST_CASE("general spectrum scale invariance and errors") {
  std::mt19937_64 gen(104);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int rep = 0; rep < 200; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    if (spec.theta_vector().maxCoeff() == 0.0) continue;
    const Eigen::VectorXd w =
        ssvd::optimal_weights_stacksvd(spec).vector().array() + 0.05;
    const auto a = ssvd::eval_general_weighted_stacksvd(
        spec, ssvd::WeightVector::from_vector(w));
    const auto b = ssvd::eval_general_weighted_stacksvd(
        spec, ssvd::WeightVector::from_vector(scale(gen) * w));
    CHECK(a.performance == doctest::Approx(b.performance).epsilon(1e-10));
  }

  // All theta_i w_i = 0: no secular equation to solve.
  try {
    ssvd::eval_general_weighted_stacksvd(
        spec1({0.0, 1.0}, {1.0, 1.0}),
        ssvd::WeightVector::from_vector(Eigen::Vector2d(1.0, 0.0)));
    FAIL("expected NoSecularRoot");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::NoSecularRoot);
  }

  // Weights that keep everything below the edge: no outlier, L = 0.
  const auto sub = ssvd::eval_general_weighted_stacksvd(
      spec1({0.4, 0.4}, {1.0, 1.0}),
      ssvd::WeightVector::from_vector(Eigen::Vector2d(1.0, 1.0)));
  CHECK(sub.performance == 0.0);
}

// ===================== thresholds =====================

TEST_CASE("detection thresholds on the spec examples") {
  {
    Eigen::VectorXd th = Eigen::VectorXd::Ones(5);
    Eigen::VectorXd cs = Eigen::VectorXd::Ones(5);
    const auto t = ssvd::detection_thresholds(ProblemSpec::rank1(th, cs));
    CHECK(t.stacksvd);
    CHECK(t.stacksvd_margin == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_FALSE(t.svdstack);
    CHECK(t.stacksvd_weighted);  // sum theta^4/c = 5 > 1
    CHECK_FALSE(t.svdstack_weighted);
  }
  {
    const auto t =
        ssvd::detection_thresholds(spec1({0.95, 0.95, 0.0}, {1, 1, 2}));
    CHECK_FALSE(t.stacksvd);
    CHECK_FALSE(t.svdstack);
    CHECK_FALSE(t.svdstack_weighted);
    CHECK_FALSE(t.stacksvd_binary_auto);
    CHECK(t.stacksvd_weighted);
    CHECK(t.stacksvd_weighted_margin ==
          doctest::Approx(2.0 * std::pow(0.95, 4) - 1.0).epsilon(1e-12));
  }
  {
    const auto t = ssvd::detection_thresholds(spec1({2.0}, {1.0}));
    CHECK(t.stacksvd);
    CHECK(t.svdstack_weighted);
    CHECK(t.stacksvd_weighted);
    CHECK(t.stacksvd_binary_auto);
    CHECK_FALSE(t.svdstack);  // a single table has no second informative one
  }
}

// ===================== rank r =====================

TEST_CASE("rank-r prediction reduces to rank-1 columnwise") {
  Eigen::MatrixXd th(2, 2);
  th << 2.0, 1.5, 2.0, 1.5;
  Eigen::VectorXd cs = Eigen::VectorXd::Ones(2);
  ProblemSpec spec;
  spec.theta = th;
  spec.c = cs;
  const auto rr = ssvd::predict_rank_r(spec);
  for (int j = 0; j < 2; ++j) {
    const ProblemSpec col = ProblemSpec::rank1(th.col(j), cs);
    CHECK(rr.gamma(j) ==
          doctest::Approx(ssvd::predict_weighted_stacksvd(col).overlap)
              .epsilon(1e-12));
    CHECK(rr.svdstack_overlap(j) ==
          doctest::Approx(ssvd::predict_weighted_svdstack(col).overlap)
              .epsilon(1e-12));
  }
  CHECK(rr.stacksvd_total ==
        doctest::Approx(rr.gamma.sum()).epsilon(1e-14));

  // Identical columns: identical per-component values.
  Eigen::MatrixXd same(2, 2);
  same << 1.8, 1.8, 1.3, 1.3;
  ProblemSpec spec2;
  spec2.theta = same;
  spec2.c = cs;
  const auto rr2 = ssvd::predict_rank_r(spec2);
  CHECK(rr2.gamma(0) == doctest::Approx(rr2.gamma(1)).epsilon(1e-12));
  CHECK(rr2.s(0) == doctest::Approx(rr2.s(1)).epsilon(1e-12));
}

TEST_CASE("rank-r bookkeeping") {
  // Sorted strengths in every table: l_j = j (1-based).
  Eigen::MatrixXd th(2, 3);
  th << 3.0, 2.0, 1.0, 2.5, 1.5, 0.5;
  ProblemSpec spec;
  spec.theta = th;
  spec.c = Eigen::VectorXd::Ones(2);
  for (int j = 0; j < 3; ++j)
    CHECK(ssvd::rank_r_weight_bookkeeping(spec, j).rank_index == j + 1);

  // Cross strengths can demote a component.
  Eigen::MatrixXd th2(2, 2);
  th2 << 2.0, 1.0, 1.0, 10.0;
  ProblemSpec spec2;
  spec2.theta = th2;
  spec2.c = Eigen::VectorXd::Ones(2);
  const auto bk = ssvd::rank_r_weight_bookkeeping(spec2, 0);
  CHECK(bk.cross_strength_sq(0) ==
        doctest::Approx(4.0 / std::sqrt(5.0) + 1.0 / std::sqrt(2.0))
            .epsilon(1e-12));
  CHECK(bk.cross_strength_sq(1) ==
        doctest::Approx(2.0 / std::sqrt(5.0) + 10.0 / std::sqrt(2.0))
            .epsilon(1e-12));
  CHECK(bk.rank_index == 2);

  // Exact ties are ambiguous.
  Eigen::MatrixXd tie(1, 2);
  tie << 1.0, 1.0;
  ProblemSpec spec3;
  spec3.theta = tie;
  spec3.c = Eigen::VectorXd::Ones(1);
  try {
    ssvd::rank_r_weight_bookkeeping(spec3, 0);
    FAIL("expected AmbiguousComponentOrder");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::AmbiguousComponentOrder);
  }

  // r = 1: always the top.
  CHECK(ssvd::rank_r_weight_bookkeeping(spec1({2.0, 1.0}, {1.0, 1.0}), 0)
            .rank_index == 1);
}

// ===================== inadmissibility instance =====================

TEST_CASE("inadmissibility instance") {
  const ProblemSpec spec = ssvd::inadmissibility_instance(0.5);
  CHECK(spec.m() == 31);
  for (int i = 0; i < spec.m(); ++i) {
    CHECK(spec.theta(i, 0) == 1.0);
    CHECK(spec.c(i) == 2.0 * (i + 1) - 1.0);
  }

  // Every prefix sits exactly at the unweighted threshold.
  double csum = 0.0;
  for (int k = 1; k <= spec.m(); ++k) {
    csum += spec.c(k - 1);
    const double t2 = static_cast<double>(k);  // sum of theta^2 over prefix
    CHECK(t2 * t2 - csum == 0.0);
    const auto rep = ssvd::predict_unweighted_stacksvd(
        ProblemSpec::rank1(spec.theta.col(0).head(k), spec.c.head(k)));
    CHECK(rep.overlap == 0.0);
  }

  const auto t = ssvd::detection_thresholds(spec);
  CHECK_FALSE(t.stacksvd);
  CHECK_FALSE(t.svdstack);
  CHECK_FALSE(t.svdstack_weighted);
  CHECK(t.stacksvd_weighted);
  CHECK(ssvd::predict_weighted_stacksvd(spec).overlap >= 0.5);

  CHECK_THROWS_AS(ssvd::inadmissibility_instance(0.0), ssvd::Error);
  CHECK_THROWS_AS(ssvd::inadmissibility_instance(1.0), ssvd::Error);
  // Tiny epsilon would need > 1e7 tables.
  try {
    ssvd::inadmissibility_instance(1e-3);
    FAIL("expected EpsilonOutOfRange");
  } catch (const ssvd::Error& e) {
    CHECK(e.code() == ssvd::ErrorCode::EpsilonOutOfRange);
  }
}

// ===================== property suites =====================

TEST_CASE("weighted stack-svd dominates the other methods") {
  std::mt19937_64 gen(202);
  for (int rep = 0; rep < 10000; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    const double w = ssvd::predict_weighted_stacksvd(spec).overlap;
    const double u = ssvd::predict_unweighted_stacksvd(spec).overlap;
    const double vs = ssvd::predict_weighted_svdstack(spec).overlap;
    REQUIRE(w >= u - 1e-9);
    REQUIRE(w >= vs - 1e-9);
  }

  // Strictness on hand-picked asymmetric instances.
  for (const ProblemSpec& spec :
       {spec1({3.0, 0.5}, {1.0, 1.0}), spec1({2.0, 1.2}, {0.5, 2.0}),
        spec1({1.5, 1.5, 0.2}, {1.0, 0.3, 1.0})}) {
    CHECK(ssvd::predict_weighted_stacksvd(spec).overlap >
          ssvd::predict_unweighted_stacksvd(spec).overlap + 1e-6);
  }
}

TEST_CASE("binary dominates weighted svd-stack when all c <= 1") {
  std::mt19937_64 gen(203);
  for (int rep = 0; rep < 10000; ++rep) {
    const ProblemSpec spec = random_spec(gen, 8, 1.0);
    const double b = ssvd::predict_binary_stacksvd(spec).overlap;
    const double vs = ssvd::predict_weighted_svdstack(spec).overlap;
    REQUIRE(b >= vs - 1e-9);
  }
}

TEST_CASE("threshold flags are consistent with the predictors") {
  std::mt19937_64 gen(204);
  for (int rep = 0; rep < 2000; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    const auto t = ssvd::detection_thresholds(spec);

    const auto ss = ssvd::predict_unweighted_stacksvd(spec);
    REQUIRE((ss.overlap > 0.0) == ss.detectable);
    REQUIRE(ss.detectable == t.stacksvd);

    const auto sw = ssvd::predict_weighted_stacksvd(spec);
    REQUIRE((sw.overlap > 0.0) == sw.detectable);
    REQUIRE(sw.detectable == t.stacksvd_weighted);

    const auto bb = ssvd::predict_binary_stacksvd(spec);
    REQUIRE((bb.overlap > 0.0) == bb.detectable);
    REQUIRE(bb.detectable == t.stacksvd_binary_auto);

    const auto vw = ssvd::predict_weighted_svdstack(spec);
    REQUIRE((vw.overlap > 0.0) == vw.detectable);
    REQUIRE(vw.detectable == t.svdstack_weighted);

    // The unweighted SVD-Stack threshold describes the non-degenerate
    // regime; with exactly one informative table the report is flagged.
    const auto vu = ssvd::predict_unweighted_svdstack(spec);
    REQUIRE((vu.overlap > 0.0) == vu.detectable);
    if (!vu.degenerate) REQUIRE(vu.detectable == t.svdstack);
  }
}

TEST_CASE("Cauchy-Schwarz threshold ordering") {
  std::mt19937_64 gen(205);
  for (int rep = 0; rep < 10000; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    const Eigen::VectorXd th = spec.theta_vector();
    double ratio = 0.0;
    for (int i = 0; i < spec.m(); ++i)
      ratio += std::pow(th(i), 4) / spec.c(i);
    const double plain =
        std::pow(th.squaredNorm(), 2) / spec.c.sum();
    REQUIRE(ratio >= plain - 1e-9 * std::max(1.0, plain));
  }
}

TEST_CASE("weighted stack-svd monotonicity in theta and c") {
  std::mt19937_64 gen(206);
  std::uniform_real_distribution<double> bump(0.01, 0.5);
  for (int rep = 0; rep < 2000; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    const double base = ssvd::predict_weighted_stacksvd(spec).overlap;
    std::uniform_int_distribution<int> pick(0, spec.m() - 1);
    const int i = pick(gen);

    ProblemSpec up = spec;
    up.theta(i, 0) += bump(gen);
    REQUIRE(ssvd::predict_weighted_stacksvd(up).overlap >= base - 1e-10);

    ProblemSpec harder = spec;
    harder.c(i) += bump(gen);
    REQUIRE(ssvd::predict_weighted_stacksvd(harder).overlap <=
            base + 1e-10);
  }
}

TEST_CASE("weighted svd-stack equals the quadratic-program optimum") {
  std::mt19937_64 gen(207);
  for (int rep = 0; rep < 2000; ++rep) {
    const ProblemSpec spec = random_spec(gen);
    const ssvd::BetaVector beta = ssvd::beta_from_theta(spec);
    const Eigen::MatrixXd a = ssvd::build_a_beta(beta);
    const Eigen::VectorXd b = beta.beta();
    const double qp = b.dot(a.llt().solve(b));
    const auto rep2 = ssvd::predict_weighted_svdstack(spec);
    REQUIRE(rep2.overlap == doctest::Approx(qp).epsilon(1e-10));
  }
}
