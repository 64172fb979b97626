#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "ssvd/errors.hpp"
#include "ssvd/rng.hpp"

namespace ssvd {

// ===================== truncated SVD =====================

struct SvdTriplet {
  Eigen::VectorXd singular_values;  // k values, descending
  Eigen::MatrixXd left;             // n x k, orthonormal columns
  Eigen::MatrixXd right;            // d x k, orthonormal columns
};

struct SvdOptions {
  // At or below this min(n,d) a dense decomposition is used for exactness;
  // above it, Golub-Kahan-Lanczos with full reorthogonalization.
  int dense_threshold = 512;
  // Lanczos iteration cap before ConvergenceFailure.
  int max_iterations = 400;
  // Relative residual target: ||A' u - s v|| <= tol * s_max per triplet.
  double tol = 1e-10;
  // When false, hitting the iteration cap returns the best Ritz triplets
  // instead of throwing; Monte Carlo sweeps near the bulk edge opt in.
  bool fail_on_max_iterations = true;
};

SvdTriplet truncated_svd(const Eigen::MatrixXd& x, int k,
                         const SvdOptions& opts = {});

// Implicit row-block operator (y = A x, y = A' x) so stacked estimators can
// run Lanczos without materializing the stacked matrix. Always iterative.
struct MatVec {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> apply;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> apply_t;
};

SvdTriplet truncated_svd(const MatVec& op, int k, const SvdOptions& opts = {});

// ===================== symmetric eigendecomposition =====================

struct SymEig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) <-> values(i)
};

// NotSymmetric if max|A - A'| exceeds symmetry_tol.
SymEig sym_eig(const Eigen::MatrixXd& a, double symmetry_tol = 1e-10);

// ===================== random orthonormal frames =====================

// d x r with orthonormal columns, Haar-distributed: QR of a standard
// Gaussian matrix with the R diagonal sign-fixed nonnegative.
Eigen::MatrixXd haar_orthonormal(Eigen::Index d, Eigen::Index r, Rng& rng);
Eigen::MatrixXd haar_orthonormal(Eigen::Index d, Eigen::Index r,
                                 std::uint64_t seed);

}  // namespace ssvd
