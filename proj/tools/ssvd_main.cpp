// Command-line front end: predict / simulate / estimate / generate.
//
// Config precedence is flags > config file (--config, INI/TOML-like
// key=value with one [section] per subcommand) > built-in defaults.
// Every run is deterministic given the resolved config and seed. All
// errors print "error <Code>: <message>" on stderr and exit nonzero.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ssvd/estimators.hpp"
#include "ssvd/io.hpp"
#include "ssvd/model.hpp"
#include "ssvd/simulate.hpp"
#include "ssvd/theory.hpp"

namespace {

using json = nlohmann::ordered_json;

// ===================== small parsing helpers =====================

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      ssvd::fail(ssvd::ErrorCode::ConfigError,
                 "trailing characters in " + what + " value '" + text + "'");
    return v;
  } catch (const ssvd::Error&) {
    throw;
  } catch (const std::exception&) {
    ssvd::fail(ssvd::ErrorCode::ConfigError,
               "cannot parse " + what + " value '" + text + "'");
  }
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& what) {
  const auto parts = split(text, ',');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_double(parts[i], what);
  return v;
}

// theta is either a flat comma list (rank 1) or ';'-separated per-table rows
// of equal length (rank r), e.g. "2,1.5;1.3,0.7".
Eigen::MatrixXd parse_theta(const std::string& text) {
  const auto rows = split(text, ';');
  Eigen::MatrixXd th;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Eigen::VectorXd row = parse_vector(rows[i], "--theta");
    if (i == 0) {
      th.resize(static_cast<Eigen::Index>(rows.size()), row.size());
    } else if (row.size() != th.cols()) {
      ssvd::fail(ssvd::ErrorCode::ConfigError,
                 "--theta rows have unequal lengths");
    }
    th.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return th;
}

// Inline spec: rank 1 accepts theta length == c length; rank r expects one
// ';'-row per table.
ssvd::ProblemSpec build_spec(const std::string& theta_text,
                             const std::string& c_text) {
  if (theta_text.empty() || c_text.empty())
    ssvd::fail(ssvd::ErrorCode::ConfigError,
               "this subcommand needs an inline spec: --theta and --c "
               "(flags or config file)");
  ssvd::ProblemSpec spec;
  spec.c = parse_vector(c_text, "--c");
  Eigen::MatrixXd th = parse_theta(theta_text);
  if (th.rows() == 1 && th.cols() == spec.c.size() && spec.c.size() > 1)
    th = Eigen::MatrixXd(th.transpose());  // flat rank-1 list
  spec.theta = th;
  ssvd::validate_spec(spec);
  return spec;
}

std::vector<int> parse_int_list(const std::string& text,
                                const std::string& what) {
  std::vector<int> out;
  for (const auto& part : split(text, ','))
    out.push_back(static_cast<int>(parse_double(part, what)));
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

json matrix_json(const Eigen::MatrixXd& x) {
  json j = json::array();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < x.cols(); ++k) row.push_back(x(i, k));
    j.push_back(row);
  }
  return j;
}

json spec_json(const ssvd::ProblemSpec& spec) {
  json j;
  j["theta"] = matrix_json(spec.theta);
  j["c"] = vector_json(spec.c);
  j["m"] = spec.m();
  j["rank"] = spec.rank();
  return j;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    ssvd::write_text(out, text);
  }
}

// Matrix writer switched on extension: .bin/.ssvd binary, anything else CSV.
void write_matrix_auto(const std::string& path, const Eigen::MatrixXd& x) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".bin" || ext == ".ssvd")
    ssvd::write_matrix_binary(path, x);
  else
    ssvd::write_matrix_csv(path, x);
}

// ===================== predict =====================

struct PredictOpts {
  std::string theta, c;
  std::string binary_rule = "auto";
  std::string subset;  // explicit binary subset, comma-separated indices
  int subset_cap = 20;
  double bisect_tol = 1e-12;
  std::string out;           // empty = stdout
  std::string format = "json";
};

json report_json(const ssvd::PredictionReport& rep) {
  json j;
  j["overlap"] = rep.overlap;
  j["detectable"] = rep.detectable;
  j["degenerate"] = rep.degenerate;
  if (rep.weights.size() > 0) j["weights"] = matrix_json(rep.weights);
  if (!std::isnan(rep.s)) j["s"] = rep.s;
  if (!std::isnan(rep.gamma)) j["gamma"] = rep.gamma;
  if (!std::isnan(rep.lambda_max_a_beta))
    j["lambda_max_a_beta"] = rep.lambda_max_a_beta;
  if (rep.method == "stack-svd-binary" || rep.method == "svd-stack-binary")
    j["subset"] = rep.subset;
  return j;
}

// Binary SVD-Stack: unweighted SVD-Stack restricted to the kept tables.
ssvd::PredictionReport binary_svdstack(const ssvd::ProblemSpec& spec,
                                       const std::vector<int>& subset) {
  ssvd::PredictionReport rep;
  rep.method = "svd-stack-binary";
  rep.subset = subset;
  rep.weights = Eigen::MatrixXd::Zero(spec.m(), 1);
  for (int i : subset) rep.weights(i, 0) = 1.0;
  if (subset.empty()) return rep;

  ssvd::ProblemSpec sub;
  sub.theta.resize(static_cast<Eigen::Index>(subset.size()), 1);
  sub.c.resize(static_cast<Eigen::Index>(subset.size()));
  for (size_t i = 0; i < subset.size(); ++i) {
    sub.theta(static_cast<Eigen::Index>(i), 0) = spec.theta(subset[i], 0);
    sub.c(static_cast<Eigen::Index>(i)) = spec.c(subset[i]);
  }
  const ssvd::PredictionReport inner = ssvd::predict_unweighted_svdstack(sub);
  rep.overlap = inner.overlap;
  rep.detectable = inner.detectable;
  rep.degenerate = inner.degenerate;
  rep.lambda_max_a_beta = inner.lambda_max_a_beta;
  return rep;
}

json threshold_json(const ssvd::ThresholdReport& t) {
  json j;
  j["stack-svd"] = {{"detectable", t.stacksvd}, {"margin", t.stacksvd_margin}};
  j["stack-svd-binary"] = {{"detectable", t.stacksvd_binary_auto},
                           {"margin", t.stacksvd_binary_auto_margin}};
  j["stack-svd-weighted"] = {{"detectable", t.stacksvd_weighted},
                             {"margin", t.stacksvd_weighted_margin}};
  j["svd-stack"] = {{"detectable", t.svdstack}, {"margin", t.svdstack_margin}};
  j["svd-stack-weighted"] = {{"detectable", t.svdstack_weighted},
                             {"margin", t.svdstack_weighted_margin}};
  return j;
}

int run_predict(const PredictOpts& opt) {
  const ssvd::ProblemSpec spec = build_spec(opt.theta, opt.c);
  json out;
  out["spec"] = spec_json(spec);
  std::string csv;

  if (spec.rank() == 1) {
    ssvd::PredictionReport binary;
    if (!opt.subset.empty()) {
      binary = ssvd::predict_binary_stacksvd(
          spec, parse_int_list(opt.subset, "--subset"));
    } else if (opt.binary_rule == "best") {
      binary = ssvd::predict_binary_stacksvd(spec, ssvd::SubsetRule::Best,
                                             opt.subset_cap);
    } else if (opt.binary_rule == "auto") {
      binary = ssvd::predict_binary_stacksvd(spec, ssvd::SubsetRule::Auto);
    } else {
      ssvd::fail(ssvd::ErrorCode::ConfigError,
                 "--binary-rule must be 'auto' or 'best', got '" +
                     opt.binary_rule + "'");
    }

    const std::vector<ssvd::PredictionReport> reports = {
        ssvd::predict_unweighted_stacksvd(spec),
        binary,
        ssvd::predict_weighted_stacksvd(spec, opt.bisect_tol),
        ssvd::predict_unweighted_svdstack(spec),
        binary_svdstack(spec, binary.subset),
        ssvd::predict_weighted_svdstack(spec),
    };

    json preds;
    std::ostringstream table;
    table << "name,overlap,detectable,degenerate\n";
    for (const auto& rep : reports) {
      preds[rep.method] = report_json(rep);
      char line[160];
      std::snprintf(line, sizeof(line), "%s,%.17g,%d,%d\n",
                    rep.method.c_str(), rep.overlap, rep.detectable ? 1 : 0,
                    rep.degenerate ? 1 : 0);
      table << line;
    }
    out["predictors"] = preds;
    out["thresholds"] = threshold_json(ssvd::detection_thresholds(spec));
    out["optimal_weights"] = {
        {"stack-svd", matrix_json(ssvd::optimal_weights_stacksvd(spec).w)},
        {"svd-stack", matrix_json(ssvd::optimal_weights_svdstack(spec).w)}};
    csv = table.str();
  } else {
    const ssvd::RankRPrediction rr =
        ssvd::predict_rank_r(spec, opt.bisect_tol);
    json block;
    block["gamma"] = vector_json(rr.gamma);
    block["s"] = vector_json(rr.s);
    block["stack-svd-overlap"] = vector_json(rr.stacksvd_overlap);
    block["svd-stack-overlap"] = vector_json(rr.svdstack_overlap);
    block["stack-svd-detectable"] = rr.stacksvd_detectable;
    block["svd-stack-detectable"] = rr.svdstack_detectable;
    block["stack-svd-total"] = rr.stacksvd_total;
    block["svd-stack-total"] = rr.svdstack_total;
    json comps = json::array();
    json comp_thresh = json::array();
    std::ostringstream table;
    table << "component,gamma,s,stack_svd_overlap,svd_stack_overlap\n";
    for (int j = 0; j < spec.rank(); ++j) {
      const ssvd::ComponentBookkeeping bk =
          ssvd::rank_r_weight_bookkeeping(spec, j);
      comps.push_back({{"rank_index", bk.rank_index},
                       {"weights", vector_json(bk.weights)},
                       {"cross_strength_sq", vector_json(bk.cross_strength_sq)}});
      comp_thresh.push_back(threshold_json(ssvd::detection_thresholds(
          ssvd::ProblemSpec::rank1(spec.theta.col(j), spec.c))));
      char line[160];
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", j,
                    rr.gamma(j), rr.s(j), rr.stacksvd_overlap(j),
                    rr.svdstack_overlap(j));
      table << line;
    }
    block["components"] = comps;
    out["rank_r"] = block;
    out["component_thresholds"] = comp_thresh;
    out["optimal_weights"] = {
        {"stack-svd", matrix_json(ssvd::optimal_weights_stacksvd(spec).w)},
        {"svd-stack", matrix_json(ssvd::optimal_weights_svdstack(spec).w)}};
    csv = table.str();
  }

  if (opt.format == "csv")
    emit(opt.out, csv);
  else if (opt.format == "json")
    emit(opt.out, out.dump(2));
  else
    ssvd::fail(ssvd::ErrorCode::ConfigError,
               "--format must be 'json' or 'csv', got '" + opt.format + "'");
  return 0;
}

// ===================== simulate =====================

struct SimulateOpts {
  std::string theta, c;
  std::string grid = "d";
  std::string d_grid;
  int d = 1000;  // ambient dimension for --grid m
  std::string m_grid;
  int replicates = 10;
  std::uint64_t seed = 1;
  std::string noise = "gaussian";
  std::string methods;
  int single_table = 0;
  std::string out = "ssvd_results.csv";
  bool center = false;
  bool rescale = false;
  double svd_tol = 1e-7;
  int svd_max_iter = 400;
  int dense_threshold = 512;
  bool svd_strict = false;
};

std::string sidecar_path(const std::string& out) {
  if (out.size() > 4 && out.substr(out.size() - 4) == ".csv")
    return out.substr(0, out.size() - 4) + ".plan.json";
  return out + ".plan.json";
}

int run_simulate(const SimulateOpts& opt) {
  ssvd::ExperimentPlan plan;
  plan.spec = build_spec(opt.theta, opt.c);
  plan.replicates = opt.replicates;
  plan.seed = opt.seed;
  plan.noise.family = ssvd::noise_family_from_name(opt.noise);
  plan.single_table_index = opt.single_table;
  plan.estimator.center_columns = opt.center;
  plan.estimator.rescale_noise = opt.rescale;
  plan.estimator.svd.tol = opt.svd_tol;
  plan.estimator.svd.max_iterations = opt.svd_max_iter;
  plan.estimator.svd.dense_threshold = opt.dense_threshold;
  plan.estimator.svd.fail_on_max_iterations = opt.svd_strict;

  if (opt.grid == "d") {
    plan.grid = ssvd::GridKind::D;
    if (opt.d_grid.empty())
      ssvd::fail(ssvd::ErrorCode::ConfigError, "--grid d needs --d-grid");
    plan.d_grid = parse_int_list(opt.d_grid, "--d-grid");
  } else if (opt.grid == "m") {
    plan.grid = ssvd::GridKind::M;
    if (opt.m_grid.empty())
      ssvd::fail(ssvd::ErrorCode::ConfigError, "--grid m needs --m-grid");
    plan.m_grid = parse_int_list(opt.m_grid, "--m-grid");
    plan.d_grid = {opt.d};
  } else {
    ssvd::fail(ssvd::ErrorCode::ConfigError,
               "--grid must be 'd' or 'm', got '" + opt.grid + "'");
  }

  if (opt.methods.empty()) {
    if (plan.spec.rank() == 1)
      plan.methods = {ssvd::SimMethod::StackSvd, ssvd::SimMethod::StackSvdBinary,
                      ssvd::SimMethod::StackSvdWeighted, ssvd::SimMethod::SvdStack,
                      ssvd::SimMethod::SvdStackWeighted};
    else
      plan.methods = {ssvd::SimMethod::StackSvdRankR,
                      ssvd::SimMethod::SvdStackRankR};
  } else {
    for (const auto& name : split(opt.methods, ','))
      plan.methods.push_back(ssvd::sim_method_from_name(name));
  }

  const ssvd::ExperimentResult result = ssvd::run_experiment(plan);
  ssvd::write_result_csv(opt.out, result);
  const std::string sidecar = sidecar_path(opt.out);
  ssvd::write_text(sidecar, ssvd::plan_json(plan));
  std::cout << "wrote " << opt.out << " (" << result.rows.size()
            << " rows) and " << sidecar << "\n";
  return 0;
}

// ===================== estimate =====================

struct EstimateOpts {
  std::vector<std::string> inputs;
  std::string method = "stack-svd";
  std::string weights = "auto";  // auto | unweighted | comma list
  std::string theta;             // known signal strengths (skips estimation)
  int rank = 1;
  double edge_margin = 1e-6;
  std::string truth;
  std::string out_vectors = "vectors.csv";
  std::string out_report = "estimate_report.csv";
  std::string out;  // alignment/summary JSON; empty = stdout
  bool center = false;
  bool rescale = false;
  double svd_tol = 1e-10;
  int svd_max_iter = 400;
  int dense_threshold = 512;
};

int run_estimate(const EstimateOpts& opt) {
  if (opt.inputs.empty())
    ssvd::fail(ssvd::ErrorCode::ConfigError,
               "--input needs at least one matrix file");
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(opt.inputs.size());
  for (const auto& path : opt.inputs) mats.push_back(ssvd::read_matrix(path));
  const ssvd::TableSet tables = ssvd::TableSet::from_tables(std::move(mats));
  const Eigen::VectorXd cs = tables.aspect_ratios();
  const int m = tables.m();

  ssvd::EstimatorOptions eopts;
  eopts.center_columns = opt.center;
  eopts.rescale_noise = opt.rescale;
  eopts.svd.tol = opt.svd_tol;
  eopts.svd.max_iterations = opt.svd_max_iter;
  eopts.svd.dense_threshold = opt.dense_threshold;

  const bool rank_r_method =
      opt.method == "stack-svd-rank-r" || opt.method == "svd-stack-rank-r";
  const bool stack = opt.method == "stack-svd" || opt.method == "stack-svd-rank-r";
  if (!rank_r_method && opt.method != "stack-svd" && opt.method != "svd-stack")
    ssvd::fail(ssvd::ErrorCode::ConfigError,
               "--method must be one of stack-svd, svd-stack, "
               "stack-svd-rank-r, svd-stack-rank-r");

  ssvd::SubspaceEstimate estimate;
  Eigen::MatrixXd used_weights;                  // m x rank actually applied
  Eigen::VectorXd theta_hat, beta_hat;           // per table (rank-1 modes)
  std::vector<std::string> how(static_cast<size_t>(m), "none");
  int reference = -1;

  if (rank_r_method) {
    // Rank-r weighting needs per-component strengths: theta rows per table.
    if (opt.theta.empty())
      ssvd::fail(ssvd::ErrorCode::ConfigError,
                 "rank-r estimation needs --theta with one ';'-row per table");
    ssvd::ProblemSpec spec;
    spec.theta = parse_theta(opt.theta);
    spec.c = cs;
    ssvd::validate_spec(spec);
    estimate = stack ? ssvd::stack_svd_rank_r(tables, spec, eopts)
                     : ssvd::svd_stack_rank_r(tables, spec, eopts);
    used_weights = stack ? ssvd::optimal_weights_stacksvd(spec).w
                         : ssvd::optimal_weights_svdstack(spec).w;
    // Per-table rank-1 columns do not apply; the report file carries the
    // per-component values instead.
    theta_hat = Eigen::VectorXd::Constant(
        m, std::numeric_limits<double>::quiet_NaN());
    beta_hat = theta_hat;
    std::fill(how.begin(), how.end(), "given");

    std::ostringstream report;
    report << "table,component,theta,beta,weight,method,reference\n";
    const ssvd::BetaVector bv = ssvd::beta_from_theta(spec);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < spec.rank(); ++j) {
        char line[200];
        std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g,given,-1\n",
                      i, j, spec.theta(i, j), std::sqrt(bv.beta_sq(i, j)),
                      used_weights(i, j));
        report << line;
      }
    ssvd::write_text(opt.out_report, report.str());
  } else {
    ssvd::WeightVector w;
    ssvd::Weighting tag = ssvd::Weighting::Custom;
    theta_hat = Eigen::VectorXd::Constant(
        m, std::numeric_limits<double>::quiet_NaN());
    beta_hat = theta_hat;

    if (!opt.theta.empty()) {
      // Known strengths: exact optimal weights, no estimation.
      ssvd::ProblemSpec spec = ssvd::ProblemSpec::rank1(
          parse_vector(opt.theta, "--theta"), cs);
      ssvd::validate_spec(spec);
      w = stack ? ssvd::optimal_weights_stacksvd(spec)
                : ssvd::optimal_weights_svdstack(spec);
      theta_hat = spec.theta_vector();
      beta_hat = ssvd::beta_from_theta(spec).beta();
      std::fill(how.begin(), how.end(), "given");
      tag = ssvd::Weighting::Weighted;
    } else if (opt.weights == "auto") {
      const ssvd::AutoWeightsResult aw = ssvd::auto_weights(
          tables, stack ? ssvd::Method::StackSvd : ssvd::Method::SvdStack,
          opt.edge_margin, eopts);
      w = aw.weights;
      theta_hat = aw.theta_hat;
      beta_hat = aw.beta_hat;
      reference = aw.reference;
      for (int i = 0; i < m; ++i)
        how[static_cast<size_t>(i)] =
            aw.method[static_cast<size_t>(i)] ==
                    ssvd::ThetaMethod::AboveThresholdQuadratic
                ? "above-threshold"
                : "cross-table";
      tag = ssvd::Weighting::Weighted;
    } else if (opt.weights == "unweighted") {
      w = ssvd::WeightVector::ones(m);
      tag = ssvd::Weighting::Unweighted;
    } else {
      w = ssvd::WeightVector::from_vector(
          parse_vector(opt.weights, "--weights"));
      if (w.m() != m)
        ssvd::fail(ssvd::ErrorCode::ShapeMismatch,
                   "--weights length does not match the table count");
    }

    // Best-effort per-table strengths for the report when none were needed
    // for the weights themselves.
    if (opt.theta.empty() && opt.weights != "auto") {
      for (int i = 0; i < m; ++i) {
        try {
          const ssvd::ThetaEstimate te = ssvd::estimate_theta_above_threshold(
              tables.tables[static_cast<size_t>(i)], cs(i), opt.edge_margin,
              eopts);
          theta_hat(i) = te.theta_hat(0);
          beta_hat(i) = te.beta_hat(0);
          how[static_cast<size_t>(i)] = "above-threshold";
        } catch (const ssvd::Error& e) {
          if (e.code() != ssvd::ErrorCode::NoOutlierSingularValue) throw;
          how[static_cast<size_t>(i)] = "below-threshold";
        }
      }
    }

    estimate = stack ? ssvd::stack_svd(tables, w, opt.rank, eopts)
                     : ssvd::svd_stack(tables, w, opt.rank, eopts);
    estimate.weighting = tag;
    used_weights = w.w;

    std::ostringstream report;
    report << "table,component,theta,beta,weight,method,reference\n";
    for (int i = 0; i < m; ++i) {
      char line[220];
      std::snprintf(line, sizeof(line), "%d,0,%.17g,%.17g,%.17g,%s,%d\n", i,
                    theta_hat(i), beta_hat(i), used_weights(i, 0),
                    how[static_cast<size_t>(i)].c_str(), reference);
      report << line;
    }
    ssvd::write_text(opt.out_report, report.str());
  }

  write_matrix_auto(opt.out_vectors, estimate.vectors);

  json summary;
  summary["method"] = ssvd::method_name(estimate.method, estimate.weighting);
  summary["rank"] = static_cast<int>(estimate.vectors.cols());
  summary["singular_values"] = vector_json(estimate.singular_values);
  summary["aspect_ratios"] = vector_json(cs);
  summary["weights"] = matrix_json(used_weights);
  summary["theta"] = vector_json(theta_hat);
  summary["beta"] = vector_json(beta_hat);
  summary["reference"] = reference;
  summary["vectors_file"] = opt.out_vectors;
  summary["report_file"] = opt.out_report;

  if (!opt.truth.empty()) {
    ssvd::GroundTruth truth;
    truth.v = ssvd::read_matrix(opt.truth);
    const ssvd::AlignmentReport al = ssvd::alignment(estimate, truth);
    summary["alignment"] = {
        {"component_overlap", vector_json(al.component_overlap)},
        {"frobenius_sq", al.frobenius_sq},
        {"projection_distance", al.projection_distance}};
  }

  emit(opt.out, summary.dump(2));
  return 0;
}

// ===================== generate =====================

struct GenerateOpts {
  std::string theta, c;
  int d = 1000;
  std::string noise = "gaussian";
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string out_dir = ".";
  std::string prefix = "table";
  bool truth = true;
  // Count pipeline (mutually exclusive with the inline spec).
  std::string counts;
  int splits = 2;
  std::string ambient;
  bool center_counts = true;
};

int run_generate(const GenerateOpts& opt) {
  if (opt.format != "csv" && opt.format != "binary")
    ssvd::fail(ssvd::ErrorCode::ConfigError,
               "--format must be 'csv' or 'binary', got '" + opt.format + "'");
  const std::string ext = opt.format == "binary" ? ".bin" : ".csv";
  std::filesystem::create_directories(opt.out_dir);
  const auto path = [&](const std::string& stem) {
    return (std::filesystem::path(opt.out_dir) / (opt.prefix + stem)).string();
  };
  const auto write = [&](const std::string& file, const Eigen::MatrixXd& x) {
    if (opt.format == "binary")
      ssvd::write_matrix_binary(file, x);
    else
      ssvd::write_matrix_csv(file, x);
  };

  json manifest;
  json files = json::array();

  if (!opt.counts.empty()) {
    if (!opt.theta.empty() || !opt.c.empty())
      ssvd::fail(ssvd::ErrorCode::ConfigError,
                 "--counts and an inline spec are mutually exclusive");
    std::vector<double> rates;
    for (const auto& part : split(opt.ambient, ','))
      if (!part.empty()) rates.push_back(parse_double(part, "--ambient"));
    if (rates.empty()) rates.assign(static_cast<size_t>(opt.splits), 0.0);
    const Eigen::MatrixXd counts = ssvd::read_matrix(opt.counts);
    const ssvd::TableSet tables = ssvd::count_pipeline(
        counts, rates, opt.splits, opt.seed, opt.center_counts);
    for (int i = 0; i < tables.m(); ++i) {
      const std::string file = path("_" + std::to_string(i) + ext);
      write(file, tables.tables[static_cast<size_t>(i)]);
      files.push_back(file);
    }
    manifest["kind"] = "counts";
    manifest["counts_file"] = opt.counts;
    manifest["splits"] = opt.splits;
    manifest["ambient"] = rates;
    manifest["center_columns"] = opt.center_counts;
  } else {
    const ssvd::ProblemSpec spec = build_spec(opt.theta, opt.c);
    ssvd::NoiseSpec noise;
    noise.family = ssvd::noise_family_from_name(opt.noise);
    const auto [tables, truth] =
        ssvd::generate_tables(spec, opt.d, noise, opt.seed);
    for (int i = 0; i < tables.m(); ++i) {
      const std::string file = path("_" + std::to_string(i) + ext);
      write(file, tables.tables[static_cast<size_t>(i)]);
      files.push_back(file);
    }
    manifest["kind"] = "synthetic";
    manifest["spec"] = spec_json(spec);
    manifest["d"] = opt.d;
    manifest["noise"] = opt.noise;
    if (opt.truth) {
      const std::string file = path("_truth" + ext);
      write(file, truth.v);
      manifest["truth"] = file;
    }
  }

  manifest["seed"] = opt.seed;
  manifest["format"] = opt.format;
  manifest["tables"] = files;
  const std::string manifest_path = path("_manifest.json");
  ssvd::write_text(manifest_path, manifest.dump(2));
  std::cout << "wrote " << files.size() << " tables and " << manifest_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared right-singular-subspace estimation across noisy tables"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Key=value config file ([predict]/[simulate]/... sections); "
                 "flags override file values, file values override defaults");

  PredictOpts pr;
  CLI::App* predict = app.add_subcommand(
      "predict", "Asymptotic overlap predictions for a problem spec");
  predict->fallthrough();
  predict->add_option("--theta", pr.theta,
                      "Signal strengths: comma list (rank 1) or ';'-separated "
                      "per-table rows (rank r)");
  predict->add_option("--c", pr.c, "Aspect ratios n_i/d, comma list");
  predict->add_option("--binary-rule", pr.binary_rule,
                      "Binary subset rule: auto (theta^4 >= c) or best "
                      "(enumerate)")->capture_default_str();
  predict->add_option("--subset", pr.subset,
                      "Explicit binary subset as comma-separated table indices");
  predict->add_option("--subset-cap", pr.subset_cap,
                      "Max tables for best-subset enumeration")
      ->capture_default_str();
  predict->add_option("--bisect-tol", pr.bisect_tol,
                      "Bisection tolerance for gamma*/secular roots")
      ->capture_default_str();
  predict->add_option("--out", pr.out, "Output file (default: stdout)");
  predict->add_option("--format", pr.format, "json or csv")
      ->capture_default_str();

  SimulateOpts sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo sweep over a d or M grid");
  simulate->fallthrough();
  simulate->add_option("--theta", sim.theta, "Signal strengths (see predict)");
  simulate->add_option("--c", sim.c, "Aspect ratios, comma list");
  simulate->add_option("--grid", sim.grid, "Sweep variable: d or m")
      ->capture_default_str();
  simulate->add_option("--d-grid", sim.d_grid,
                       "Ambient dimensions for --grid d, comma list");
  simulate->add_option("--d", sim.d, "Ambient dimension for --grid m")
      ->capture_default_str();
  simulate->add_option("--m-grid", sim.m_grid,
                       "Table counts for --grid m, comma list "
                       "(spec resized by replicating the last table)");
  simulate->add_option("--replicates", sim.replicates, "Replicates per point")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  simulate->add_option("--noise", sim.noise,
                       "gaussian, centered-exponential, or rademacher")
      ->capture_default_str();
  simulate->add_option("--methods", sim.methods,
                       "Comma list of estimators (default: all rank-1 or all "
                       "rank-r methods)");
  simulate->add_option("--single-table", sim.single_table,
                       "Table index for svd-stack-single")
      ->capture_default_str();
  simulate->add_option("--out", sim.out,
                       "Results CSV; the resolved plan lands next to it as "
                       "<out>.plan.json")->capture_default_str();
  simulate->add_flag("--center", sim.center, "Center columns per table");
  simulate->add_flag("--rescale-noise", sim.rescale,
                     "Rescale by the estimated noise level (experimental)");
  simulate->add_option("--svd-tol", sim.svd_tol, "Lanczos residual tolerance")
      ->capture_default_str();
  simulate->add_option("--svd-max-iter", sim.svd_max_iter,
                       "Lanczos iteration cap")->capture_default_str();
  simulate->add_option("--dense-threshold", sim.dense_threshold,
                       "Dense SVD below this min(n,d)")->capture_default_str();
  simulate->add_flag("--svd-strict", sim.svd_strict,
                     "Fail on the Lanczos cap instead of returning the best "
                     "Ritz triplets");

  EstimateOpts est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Estimate the shared subspace from data files");
  estimate->fallthrough();
  estimate->add_option("--input", est.inputs,
                       "Matrix files (CSV or binary), one per table")
      ->delimiter(',');
  estimate->add_option("--method", est.method,
                       "stack-svd, svd-stack, stack-svd-rank-r, or "
                       "svd-stack-rank-r")->capture_default_str();
  estimate->add_option("--weights", est.weights,
                       "auto, unweighted, or an explicit comma list")
      ->capture_default_str();
  estimate->add_option("--theta", est.theta,
                       "Known signal strengths (skips estimation; rank-r "
                       "rows split by ';')");
  estimate->add_option("--rank", est.rank, "Components to return")
      ->capture_default_str();
  estimate->add_option("--edge-margin", est.edge_margin,
                       "Required clearance above the bulk edge")
      ->capture_default_str();
  estimate->add_option("--truth", est.truth,
                       "Ground-truth matrix file; adds alignment metrics");
  estimate->add_option("--out-vectors", est.out_vectors,
                       "Estimated vectors file (.bin/.ssvd binary, else CSV)")
      ->capture_default_str();
  estimate->add_option("--out-report", est.out_report,
                       "Per-table theta/beta/weight CSV")
      ->capture_default_str();
  estimate->add_option("--out", est.out, "Summary JSON (default: stdout)");
  estimate->add_flag("--center", est.center, "Center columns per table");
  estimate->add_flag("--rescale-noise", est.rescale,
                     "Rescale by the estimated noise level (experimental)");
  estimate->add_option("--svd-tol", est.svd_tol, "Lanczos residual tolerance")
      ->capture_default_str();
  estimate->add_option("--svd-max-iter", est.svd_max_iter,
                       "Lanczos iteration cap")->capture_default_str();
  estimate->add_option("--dense-threshold", est.dense_threshold,
                       "Dense SVD below this min(n,d)")->capture_default_str();

  GenerateOpts gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "Write synthetic tables (or count-pipeline tables) to disk");
  generate->fallthrough();
  generate->add_option("--theta", gen.theta, "Signal strengths (see predict)");
  generate->add_option("--c", gen.c, "Aspect ratios, comma list");
  generate->add_option("--d", gen.d, "Ambient dimension")
      ->capture_default_str();
  generate->add_option("--noise", gen.noise,
                       "gaussian, centered-exponential, or rademacher")
      ->capture_default_str();
  generate->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  generate->add_option("--format", gen.format, "csv or binary")
      ->capture_default_str();
  generate->add_option("--out-dir", gen.out_dir, "Output directory")
      ->capture_default_str();
  generate->add_option("--prefix", gen.prefix, "Output file prefix")
      ->capture_default_str();
  generate->add_flag("--truth,!--no-truth", gen.truth,
                     "Also write the ground-truth matrix (default on)");
  generate->add_option("--counts", gen.counts,
                       "Count matrix file: run the semi-synthetic count "
                       "pipeline instead of the spiked model");
  generate->add_option("--splits", gen.splits, "Row blocks for --counts")
      ->capture_default_str();
  generate->add_option("--ambient", gen.ambient,
                       "Ambient Poisson rates per block, comma list");
  generate->add_flag("--center,!--no-center", gen.center_counts,
                     "Center columns in the count pipeline (default on)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error ConfigError: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*predict) return run_predict(pr);
    if (*simulate) return run_simulate(sim);
    if (*estimate) return run_estimate(est);
    if (*generate) return run_generate(gen);
  } catch (const ssvd::Error& e) {
    std::cerr << "error " << e.code_name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error Internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
