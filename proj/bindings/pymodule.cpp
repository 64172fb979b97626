// Python bindings for the shared-subspace estimation library.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssvd/estimators.hpp"
#include "ssvd/io.hpp"
#include "ssvd/model.hpp"
#include "ssvd/simulate.hpp"
#include "ssvd/theory.hpp"

namespace py = pybind11;

namespace {

ssvd::ProblemSpec make_spec(const Eigen::MatrixXd& theta,
                            const Eigen::VectorXd& c) {
  ssvd::ProblemSpec spec;
  // A 1 x m theta row against length-m c is a flat rank-1 list.
  if (theta.rows() == 1 && theta.cols() == c.size() && c.size() > 1)
    spec.theta = theta.transpose();
  else
    spec.theta = theta;
  spec.c = c;
  ssvd::validate_spec(spec);
  return spec;
}

ssvd::TableSet make_tables(const std::vector<Eigen::MatrixXd>& tables) {
  return ssvd::TableSet::from_tables(
      std::vector<Eigen::MatrixXd>(tables.begin(), tables.end()));
}

ssvd::EstimatorOptions make_opts(double svd_tol, int svd_max_iterations,
                                 int dense_threshold, bool center_columns,
                                 bool rescale_noise,
                                 bool fail_on_max_iterations) {
  ssvd::EstimatorOptions opts;
  opts.svd.tol = svd_tol;
  opts.svd.max_iterations = svd_max_iterations;
  opts.svd.dense_threshold = dense_threshold;
  opts.svd.fail_on_max_iterations = fail_on_max_iterations;
  opts.center_columns = center_columns;
  opts.rescale_noise = rescale_noise;
  return opts;
}

ssvd::WeightVector make_weights(const Eigen::MatrixXd& w) {
  ssvd::WeightVector wv;
  wv.w = w.cols() == 1 || w.rows() > 1 ? w : Eigen::MatrixXd(w.transpose());
  wv.validate();
  return wv;
}

py::dict threshold_dict(const ssvd::ThresholdReport& t) {
  py::dict d;
  d["stack_svd"] = t.stacksvd;
  d["stack_svd_margin"] = t.stacksvd_margin;
  d["stack_svd_binary"] = t.stacksvd_binary_auto;
  d["stack_svd_binary_margin"] = t.stacksvd_binary_auto_margin;
  d["stack_svd_weighted"] = t.stacksvd_weighted;
  d["stack_svd_weighted_margin"] = t.stacksvd_weighted_margin;
  d["svd_stack"] = t.svdstack;
  d["svd_stack_margin"] = t.svdstack_margin;
  d["svd_stack_weighted"] = t.svdstack_weighted;
  d["svd_stack_weighted_margin"] = t.svdstack_weighted_margin;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shared right-singular-subspace estimation across noisy tables";

  static py::exception<ssvd::Error> exc(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ssvd::Error& e) {
      py::set_error(
          exc, (std::string(e.code_name()) + ": " + e.what()).c_str());
    }
  });

  // ===================== model =====================

  py::class_<ssvd::ProblemSpec>(m, "ProblemSpec")
      .def(py::init(&make_spec), py::arg("theta"), py::arg("c"))
      .def_readonly("theta", &ssvd::ProblemSpec::theta)
      .def_readonly("c", &ssvd::ProblemSpec::c)
      .def_property_readonly("m", &ssvd::ProblemSpec::m)
      .def_property_readonly("rank", &ssvd::ProblemSpec::rank);

  py::class_<ssvd::PredictionReport>(m, "PredictionReport")
      .def_readonly("method", &ssvd::PredictionReport::method)
      .def_readonly("overlap", &ssvd::PredictionReport::overlap)
      .def_readonly("detectable", &ssvd::PredictionReport::detectable)
      .def_readonly("degenerate", &ssvd::PredictionReport::degenerate)
      .def_readonly("weights", &ssvd::PredictionReport::weights)
      .def_readonly("s", &ssvd::PredictionReport::s)
      .def_readonly("gamma", &ssvd::PredictionReport::gamma)
      .def_readonly("lambda_max_a_beta",
                    &ssvd::PredictionReport::lambda_max_a_beta)
      .def_readonly("subset", &ssvd::PredictionReport::subset);

  py::class_<ssvd::SubspaceEstimate>(m, "SubspaceEstimate")
      .def_readonly("vectors", &ssvd::SubspaceEstimate::vectors)
      .def_readonly("singular_values",
                    &ssvd::SubspaceEstimate::singular_values);

  py::class_<ssvd::AlignmentReport>(m, "AlignmentReport")
      .def_readonly("component_overlap",
                    &ssvd::AlignmentReport::component_overlap)
      .def_readonly("frobenius_sq", &ssvd::AlignmentReport::frobenius_sq)
      .def_readonly("projection_distance",
                    &ssvd::AlignmentReport::projection_distance);

  // ===================== theory =====================

  m.def("beta_from_theta", [](const ssvd::ProblemSpec& spec) {
    return ssvd::beta_from_theta(spec).beta_sq;
  },
        py::arg("spec"), "Per-table asymptotic squared overlaps beta^2");

  m.def("predict_stack_svd", &ssvd::predict_unweighted_stacksvd,
        py::arg("spec"));
  m.def("predict_svd_stack", &ssvd::predict_unweighted_svdstack,
        py::arg("spec"));
  m.def(
      "predict_stack_svd_binary",
      [](const ssvd::ProblemSpec& spec, const std::string& rule, int cap) {
        if (rule == "auto")
          return ssvd::predict_binary_stacksvd(spec, ssvd::SubsetRule::Auto);
        if (rule == "best")
          return ssvd::predict_binary_stacksvd(spec, ssvd::SubsetRule::Best,
                                               cap);
        ssvd::fail(ssvd::ErrorCode::ConfigError,
                   "rule must be 'auto' or 'best', got '" + rule + "'");
      },
      py::arg("spec"), py::arg("rule") = "auto",
      py::arg("enumeration_cap") = 20);
  m.def(
      "predict_stack_svd_subset",
      [](const ssvd::ProblemSpec& spec, const std::vector<int>& subset) {
        return ssvd::predict_binary_stacksvd(spec, subset);
      },
      py::arg("spec"), py::arg("subset"));
  m.def("predict_stack_svd_weighted", &ssvd::predict_weighted_stacksvd,
        py::arg("spec"), py::arg("bisect_tol") = 1e-12);
  m.def("predict_svd_stack_weighted", &ssvd::predict_weighted_svdstack,
        py::arg("spec"));

  m.def("optimal_weights_stack_svd", [](const ssvd::ProblemSpec& spec) {
    return ssvd::optimal_weights_stacksvd(spec).w;
  },
        py::arg("spec"));
  m.def("optimal_weights_svd_stack", [](const ssvd::ProblemSpec& spec) {
    return ssvd::optimal_weights_svdstack(spec).w;
  },
        py::arg("spec"));

  m.def(
      "eval_weighted_stack_svd",
      [](const ssvd::ProblemSpec& spec, const Eigen::MatrixXd& w,
         double bisect_tol) {
        const ssvd::WeightedStackSpectrum s =
            ssvd::eval_general_weighted_stacksvd(spec, make_weights(w),
                                                 bisect_tol);
        py::dict d;
        d["gamma1"] = s.gamma1;
        d["assumption_check"] = s.assumption_check;
        d["performance"] = s.performance;
        d["has_outlier"] = s.has_outlier;
        return d;
      },
      py::arg("spec"), py::arg("weights"), py::arg("bisect_tol") = 1e-12,
      "Top population eigenvalue, assumption check A, and overlap L for an "
      "arbitrary nonnegative weighting");

  m.def(
      "detection_thresholds",
      [](const ssvd::ProblemSpec& spec) {
        return threshold_dict(ssvd::detection_thresholds(spec));
      },
      py::arg("spec"));

  m.def(
      "predict_rank_r",
      [](const ssvd::ProblemSpec& spec, double bisect_tol) {
        const ssvd::RankRPrediction r = ssvd::predict_rank_r(spec, bisect_tol);
        py::dict d;
        d["gamma"] = r.gamma;
        d["s"] = r.s;
        d["stack_svd_overlap"] = r.stacksvd_overlap;
        d["svd_stack_overlap"] = r.svdstack_overlap;
        d["stack_svd_detectable"] = r.stacksvd_detectable;
        d["svd_stack_detectable"] = r.svdstack_detectable;
        d["stack_svd_total"] = r.stacksvd_total;
        d["svd_stack_total"] = r.svdstack_total;
        return d;
      },
      py::arg("spec"), py::arg("bisect_tol") = 1e-12);

  m.def("inadmissibility_instance", &ssvd::inadmissibility_instance,
        py::arg("epsilon"),
        "Instance whose unweighted/binary prefixes all sit at the detection "
        "threshold while optimal weighting reaches overlap >= 1 - epsilon");

  // ===================== estimators =====================

  m.def(
      "stack_svd",
      [](const std::vector<Eigen::MatrixXd>& tables,
         py::object weights, int k, double svd_tol, int svd_max_iterations,
         int dense_threshold, bool center_columns, bool rescale_noise,
         bool fail_on_max_iterations) {
        const ssvd::TableSet ts = make_tables(tables);
        const ssvd::EstimatorOptions opts = make_opts(
            svd_tol, svd_max_iterations, dense_threshold, center_columns,
            rescale_noise, fail_on_max_iterations);
        if (weights.is_none()) return ssvd::stack_svd(ts, k, opts);
        return ssvd::stack_svd(ts, make_weights(weights.cast<Eigen::MatrixXd>()),
                               k, opts);
      },
      py::arg("tables"), py::arg("weights") = py::none(), py::arg("k") = 1,
      py::arg("svd_tol") = 1e-10, py::arg("svd_max_iterations") = 400,
      py::arg("dense_threshold") = 512, py::arg("center_columns") = false,
      py::arg("rescale_noise") = false,
      py::arg("fail_on_max_iterations") = true,
      "Right singular subspace of the (implicit) vertical stack of weighted "
      "tables");

  m.def(
      "svd_stack",
      [](const std::vector<Eigen::MatrixXd>& tables,
         py::object weights, int k, double svd_tol, int svd_max_iterations,
         int dense_threshold, bool center_columns, bool rescale_noise,
         bool fail_on_max_iterations) {
        const ssvd::TableSet ts = make_tables(tables);
        const ssvd::EstimatorOptions opts = make_opts(
            svd_tol, svd_max_iterations, dense_threshold, center_columns,
            rescale_noise, fail_on_max_iterations);
        if (weights.is_none()) return ssvd::svd_stack(ts, k, opts);
        return ssvd::svd_stack(ts, make_weights(weights.cast<Eigen::MatrixXd>()),
                               k, opts);
      },
      py::arg("tables"), py::arg("weights") = py::none(), py::arg("k") = 1,
      py::arg("svd_tol") = 1e-10, py::arg("svd_max_iterations") = 400,
      py::arg("dense_threshold") = 512, py::arg("center_columns") = false,
      py::arg("rescale_noise") = false,
      py::arg("fail_on_max_iterations") = true,
      "Per-table top singular vectors stacked as rows, then the leading "
      "right singular vectors of that small matrix");

  m.def(
      "stack_svd_rank_r",
      [](const std::vector<Eigen::MatrixXd>& tables,
         const ssvd::ProblemSpec& spec, double svd_tol,
         int svd_max_iterations, int dense_threshold, bool center_columns,
         bool rescale_noise, bool fail_on_max_iterations) {
        return ssvd::stack_svd_rank_r(
            make_tables(tables), spec,
            make_opts(svd_tol, svd_max_iterations, dense_threshold,
                      center_columns, rescale_noise, fail_on_max_iterations));
      },
      py::arg("tables"), py::arg("spec"), py::arg("svd_tol") = 1e-10,
      py::arg("svd_max_iterations") = 400, py::arg("dense_threshold") = 512,
      py::arg("center_columns") = false, py::arg("rescale_noise") = false,
      py::arg("fail_on_max_iterations") = true);

  m.def(
      "svd_stack_rank_r",
      [](const std::vector<Eigen::MatrixXd>& tables,
         const ssvd::ProblemSpec& spec, double svd_tol,
         int svd_max_iterations, int dense_threshold, bool center_columns,
         bool rescale_noise, bool fail_on_max_iterations) {
        return ssvd::svd_stack_rank_r(
            make_tables(tables), spec,
            make_opts(svd_tol, svd_max_iterations, dense_threshold,
                      center_columns, rescale_noise, fail_on_max_iterations));
      },
      py::arg("tables"), py::arg("spec"), py::arg("svd_tol") = 1e-10,
      py::arg("svd_max_iterations") = 400, py::arg("dense_threshold") = 512,
      py::arg("center_columns") = false, py::arg("rescale_noise") = false,
      py::arg("fail_on_max_iterations") = true);

  m.def(
      "estimate_theta",
      [](const Eigen::MatrixXd& table, double c, double edge_margin) {
        const ssvd::ThetaEstimate t =
            ssvd::estimate_theta_above_threshold(table, c, edge_margin);
        return py::make_tuple(t.theta_hat(0), t.beta_hat(0));
      },
      py::arg("table"), py::arg("c"), py::arg("edge_margin") = 1e-6,
      "(theta_hat, beta_hat) from the top singular value of one table");

  m.def(
      "estimate_theta_cross_table",
      [](const Eigen::MatrixXd& reference, double c_ref,
         const Eigen::MatrixXd& target, double c_tgt, double edge_margin) {
        const ssvd::ThetaEstimate t = ssvd::estimate_theta_cross_table(
            reference, c_ref, target, c_tgt, edge_margin);
        return py::make_tuple(t.theta_hat(0), t.beta_hat(0));
      },
      py::arg("reference"), py::arg("c_ref"), py::arg("target"),
      py::arg("c_tgt"), py::arg("edge_margin") = 1e-6);

  m.def(
      "auto_weights",
      [](const std::vector<Eigen::MatrixXd>& tables, const std::string& method,
         double edge_margin) {
        const ssvd::AutoWeightsResult r = ssvd::auto_weights(
            make_tables(tables),
            method == "svd-stack" ? ssvd::Method::SvdStack
                                  : ssvd::Method::StackSvd,
            edge_margin);
        py::dict d;
        d["weights"] = r.weights.w;
        d["theta"] = r.theta_hat;
        d["beta"] = r.beta_hat;
        d["reference"] = r.reference;
        std::vector<std::string> names;
        for (auto t : r.method)
          names.push_back(t == ssvd::ThetaMethod::AboveThresholdQuadratic
                              ? "above-threshold"
                              : "cross-table");
        d["method"] = names;
        return d;
      },
      py::arg("tables"), py::arg("method") = "stack-svd",
      py::arg("edge_margin") = 1e-6,
      "Data-driven optimal weights via per-table signal-strength estimates");

  m.def(
      "alignment",
      [](const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& truth) {
        ssvd::SubspaceEstimate est;
        est.vectors = vectors;
        ssvd::GroundTruth gt;
        gt.v = truth;
        return ssvd::alignment(est, gt);
      },
      py::arg("vectors"), py::arg("truth"),
      "Squared-overlap metrics between an estimated and a true subspace");

  // ===================== simulation =====================

  m.def(
      "generate_tables",
      [](const ssvd::ProblemSpec& spec, int d, const std::string& noise,
         std::uint64_t seed) {
        ssvd::NoiseSpec ns;
        ns.family = ssvd::noise_family_from_name(noise);
        auto [tables, truth] = ssvd::generate_tables(spec, d, ns, seed);
        return py::make_tuple(tables.tables, truth.v);
      },
      py::arg("spec"), py::arg("d"), py::arg("noise") = "gaussian",
      py::arg("seed") = 1,
      "(tables, truth_v) drawn from the spiked model at dimension d");

  m.def("sample_random_spec", &ssvd::sample_random_spec, py::arg("mu"),
        py::arg("m"), py::arg("seed"));

  m.def(
      "count_pipeline",
      [](const Eigen::MatrixXd& counts, const std::vector<double>& ambient,
         int splits, std::uint64_t seed, bool center_columns) {
        return ssvd::count_pipeline(counts, ambient, splits, seed,
                                    center_columns).tables;
      },
      py::arg("counts"), py::arg("ambient"), py::arg("splits"),
      py::arg("seed"), py::arg("center_columns") = true);

  m.def(
      "run_experiment",
      [](const ssvd::ProblemSpec& spec, const std::string& grid,
         const std::vector<int>& d_grid, const std::vector<int>& m_grid,
         int replicates, std::uint64_t seed,
         const std::vector<std::string>& methods, const std::string& noise,
         int single_table_index, double svd_tol, int svd_max_iterations,
         int dense_threshold, bool center_columns, bool rescale_noise,
         bool fail_on_max_iterations) {
        ssvd::ExperimentPlan plan;
        plan.spec = spec;
        plan.grid = grid == "m" ? ssvd::GridKind::M : ssvd::GridKind::D;
        plan.d_grid = d_grid;
        plan.m_grid = m_grid;
        plan.replicates = replicates;
        plan.seed = seed;
        for (const auto& name : methods)
          plan.methods.push_back(ssvd::sim_method_from_name(name));
        plan.noise.family = ssvd::noise_family_from_name(noise);
        plan.single_table_index = single_table_index;
        plan.estimator = make_opts(svd_tol, svd_max_iterations,
                                   dense_threshold, center_columns,
                                   rescale_noise, fail_on_max_iterations);
        const ssvd::ExperimentResult result = ssvd::run_experiment(plan);
        py::list rows;
        for (const auto& row : result.rows) {
          py::dict d;
          d["grid_value"] = row.grid_value;
          d["method"] = row.method;
          d["mean_overlap"] = row.mean_overlap;
          d["std_err"] = row.std_err;
          d["theory"] = row.theory;
          d["bias"] = row.bias;
          rows.append(d);
        }
        return rows;
      },
      py::arg("spec"), py::arg("grid") = "d",
      py::arg("d_grid") = std::vector<int>{},
      py::arg("m_grid") = std::vector<int>{}, py::arg("replicates") = 10,
      py::arg("seed") = 1,
      py::arg("methods") = std::vector<std::string>{"stack-svd", "svd-stack"},
      py::arg("noise") = "gaussian", py::arg("single_table_index") = 0,
      py::arg("svd_tol") = 1e-7, py::arg("svd_max_iterations") = 400,
      py::arg("dense_threshold") = 512, py::arg("center_columns") = false,
      py::arg("rescale_noise") = false,
      py::arg("fail_on_max_iterations") = false,
      "Monte Carlo sweep; returns one dict per (grid point, method)");

  // ===================== io =====================

  m.def("read_matrix", &ssvd::read_matrix, py::arg("path"),
        "Load a CSV or binary matrix file (sniffed by magic bytes)");
  m.def("write_matrix_csv", &ssvd::write_matrix_csv, py::arg("path"),
        py::arg("matrix"));
  m.def("write_matrix_binary", &ssvd::write_matrix_binary, py::arg("path"),
        py::arg("matrix"));
}
