#include "ssvd/linalg.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace ssvd {

namespace {

// Classical Gram-Schmidt applied twice against the first `count` columns.
void reorthogonalize(const Eigen::MatrixXd& basis, Eigen::Index count,
                     Eigen::VectorXd& v) {
  if (count == 0) return;
  const auto q = basis.leftCols(count);
  v.noalias() -= q * (q.transpose() * v);
  v.noalias() -= q * (q.transpose() * v);
}

// Fresh unit vector orthogonal to the first `count` basis columns; used when
// Lanczos hits an exact invariant subspace and must restart.
Eigen::VectorXd fresh_direction(const Eigen::MatrixXd& basis,
                                Eigen::Index count, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::VectorXd v(basis.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    reorthogonalize(basis, count, v);
    const double norm = v.norm();
    if (norm > 1e-6) return v / norm;
  }
  fail(ErrorCode::ConvergenceFailure,
       "failed to draw a restart direction orthogonal to the Lanczos basis");
}

SvdTriplet dense_svd(const Eigen::MatrixXd& x, int k) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdTriplet out;
  out.singular_values = svd.singularValues().head(k);
  out.left = svd.matrixU().leftCols(k);
  out.right = svd.matrixV().leftCols(k);
  return out;
}

// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
// The start vector comes from a fixed-seed generator, so the result is
// deterministic given the operator. Residual of the i-th Ritz triplet is
// beta_{s-1} * |P(s-1, i)| where B_s = P Sigma Q'.
SvdTriplet lanczos_svd(const MatVec& op, int k, const SvdOptions& opts) {
  const Eigen::Index n = op.rows;
  const Eigen::Index d = op.cols;
  const Eigen::Index min_dim = std::min(n, d);
  const int cap = static_cast<int>(std::min<Eigen::Index>(
      min_dim, std::max(opts.max_iterations, 2 * k + 10)));

  Eigen::MatrixXd v_basis(d, cap);
  Eigen::MatrixXd u_basis(n, cap);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(cap);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cap);

  Rng rng(0x53535644ULL);  // "SSVD"
  {
    Eigen::VectorXd v0(d);
    for (Eigen::Index i = 0; i < d; ++i) v0(i) = rng.normal();
    v_basis.col(0) = v0 / v0.norm();
  }

  Eigen::VectorXd u_work(n), v_work(d);
  Eigen::BDCSVD<Eigen::MatrixXd> small_svd;
  double scale = 0.0;  // running estimate of sigma_1 for breakdown tests
  int converged_at = -1;

  for (int j = 0; j < cap; ++j) {
    // u_j = A v_j - beta_{j-1} u_{j-1}
    op.apply(v_basis.col(j), u_work);
    if (j > 0) u_work.noalias() -= beta(j - 1) * u_basis.col(j - 1);
    reorthogonalize(u_basis, j, u_work);
    alpha(j) = u_work.norm();
    scale = std::max(scale, alpha(j));
    if (alpha(j) > 1e-13 * std::max(scale, 1e-30)) {
      u_basis.col(j) = u_work / alpha(j);
    } else {
      alpha(j) = 0.0;
      u_basis.col(j) = fresh_direction(u_basis, j, rng);
    }

    // w = A' u_j - alpha_j v_j  ->  v_{j+1}
    op.apply_t(u_basis.col(j), v_work);
    v_work.noalias() -= alpha(j) * v_basis.col(j);
    reorthogonalize(v_basis, j + 1, v_work);
    beta(j) = v_work.norm();
    scale = std::max(scale, beta(j));

    const int s = j + 1;
    // Small-SVD checks are cheap early and throttled once the basis grows.
    const bool check = s >= k && (s <= 32 || s % 4 == 0 || s == cap);
    if (check) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(s, s);
      for (int i = 0; i < s; ++i) {
        b(i, i) = alpha(i);
        if (i + 1 < s) b(i, i + 1) = beta(i);
      }
      small_svd.compute(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double top = std::max(small_svd.singularValues()(0), 1e-300);
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) {
        ok = beta(j) * std::abs(small_svd.matrixU()(s - 1, i)) <=
             opts.tol * top;
      }
      if (ok) {
        converged_at = s;
        break;
      }
    }

    if (s < cap) {
      if (beta(j) > 1e-13 * std::max(scale, 1e-30)) {
        v_basis.col(s) = v_work / beta(j);
      } else {
        beta(j) = 0.0;
        v_basis.col(s) = fresh_direction(v_basis, s, rng);
      }
    }
  }

  if (converged_at < 0) {
    if (opts.fail_on_max_iterations) {
      fail(ErrorCode::ConvergenceFailure,
           "Lanczos SVD did not reach tolerance " + std::to_string(opts.tol) +
               " within " + std::to_string(cap) + " iterations");
    }
    converged_at = cap;  // best-effort: the cap-sized check already ran
  }

  const int s = converged_at;
  SvdTriplet out;
  out.singular_values = small_svd.singularValues().head(k);
  out.left.noalias() = u_basis.leftCols(s) * small_svd.matrixU().leftCols(k);
  out.right.noalias() = v_basis.leftCols(s) * small_svd.matrixV().leftCols(k);
  return out;
}

}  // namespace

SvdTriplet truncated_svd(const Eigen::MatrixXd& x, int k,
                         const SvdOptions& opts) {
  const Eigen::Index min_dim = std::min(x.rows(), x.cols());
  if (k < 1 || k > min_dim) {
    fail(ErrorCode::RankTooLarge,
         "k = " + std::to_string(k) + " outside [1, min(n,d) = " +
             std::to_string(min_dim) + "]");
  }
  if (min_dim <= opts.dense_threshold) return dense_svd(x, k);

  MatVec op;
  op.rows = x.rows();
  op.cols = x.cols();
  op.apply = [&x](const Eigen::VectorXd& v, Eigen::VectorXd& y) {
    y.noalias() = x * v;
  };
  op.apply_t = [&x](const Eigen::VectorXd& u, Eigen::VectorXd& y) {
    y.noalias() = x.transpose() * u;
  };
  return lanczos_svd(op, k, opts);
}

SvdTriplet truncated_svd(const MatVec& op, int k, const SvdOptions& opts) {
  if (k < 1 || k > std::min(op.rows, op.cols)) {
    fail(ErrorCode::RankTooLarge,
         "k = " + std::to_string(k) + " outside [1, min(n,d) = " +
             std::to_string(std::min(op.rows, op.cols)) + "]");
  }
  return lanczos_svd(op, k, opts);
}

SymEig sym_eig(const Eigen::MatrixXd& a, double symmetry_tol) {
  if (a.rows() != a.cols()) {
    fail(ErrorCode::NotSymmetric,
         "matrix is " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()));
  }
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > symmetry_tol) {
    fail(ErrorCode::NotSymmetric,
         "max |A - A'| = " + std::to_string(asym) + " exceeds tolerance");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::ConvergenceFailure, "symmetric eigensolver failed");
  }

  // Eigen returns ascending order; flip to descending.
  SymEig out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Eigen::MatrixXd haar_orthonormal(Eigen::Index d, Eigen::Index r, Rng& rng) {
  if (r < 1 || r > d) {
    fail(ErrorCode::RankTooLarge,
         "r = " + std::to_string(r) + " outside [1, d = " + std::to_string(d) +
             "]");
  }
  Eigen::MatrixXd g(d, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
  const Eigen::MatrixXd r_factor =
      qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  // Sign-fix the R diagonal so the distribution is exactly Haar.
  for (Eigen::Index j = 0; j < r; ++j) {
    if (r_factor(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Eigen::MatrixXd haar_orthonormal(Eigen::Index d, Eigen::Index r,
                                 std::uint64_t seed) {
  Rng rng(seed);
  return haar_orthonormal(d, r, rng);
}

}  // namespace ssvd
