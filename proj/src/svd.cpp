#include "mplex/svd.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mplex/rng.hpp"

namespace mplex {

void apply_sign_convention(Matrix& U, Matrix& V) {
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      const double a = std::abs(U(i, k));
      if (a > best) {  // strict: first occurrence wins ties
        best = a;
        arg = i;
      }
    }
    if (U(arg, k) < 0.0) {
      U.col(k) = -U.col(k);
      V.col(k) = -V.col(k);
    }
  }
}

namespace {

void check_rank(const Matrix& A, int rank) {
  if (rank < 1 || rank > std::min(A.rows(), A.cols()))
    throw argument_error("truncated_svd: rank " + std::to_string(rank) +
                         " outside [1, min(rows, cols)]");
  if (!A.allFinite()) throw argument_error("truncated_svd: nonfinite input");
}

}  // namespace

SvdResult truncated_svd_dense(const Matrix& A, int rank) {
  check_rank(A, rank);
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw numerical_error("truncated_svd: dense decomposition failed to converge");
  SvdResult out;
  out.U = svd.matrixU().leftCols(rank);
  out.sigma = svd.singularValues().head(rank);
  out.V = svd.matrixV().leftCols(rank);
  apply_sign_convention(out.U, out.V);
  return out;
}

SvdResult truncated_svd_lanczos(const Matrix& A, int rank, const LanczosOptions& options) {
  check_rank(A, rank);
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const int kdim = int(std::min<Eigen::Index>(std::min(m, n),
                                              rank + std::max(options.extra_vectors, 2)));
  const int max_iter = options.max_iterations > 0
                           ? std::min<int>(options.max_iterations, int(std::min(m, n)))
                           : int(std::min(m, n));

  Matrix Vk(n, max_iter + 1);
  Matrix Uk(m, max_iter);
  Vector alphas(max_iter), betas(max_iter);

  // Fixed start vector: reproducible for identical input.
  {
    Rng rng(0x6d706c657873ULL);
    Vector v0(n);
    for (Eigen::Index i = 0; i < n; ++i) v0(i) = rng.next_uniform() - 0.5;
    Vk.col(0) = v0 / v0.norm();
  }

  auto reorthogonalize = [](Eigen::Ref<Vector> w, const Matrix& basis, int count) {
    // two passes of classical Gram-Schmidt against the accumulated basis
    for (int pass = 0; pass < 2; ++pass)
      w.noalias() -= basis.leftCols(count) * (basis.leftCols(count).transpose() * w);
  };

  const double scale = A.norm();  // Frobenius; breakdown threshold reference
  if (scale == 0.0)
    throw numerical_error("truncated_svd_lanczos: zero matrix has no rank-" +
                          std::to_string(rank) + " factorization");

  SvdResult out;
  int k = 0;
  Vector p(m), r(n);
  while (k < max_iter) {
    // u_k = A v_k - beta_{k-1} u_{k-1}, alpha_k = ||u_k||
    p.noalias() = A * Vk.col(k);
    if (k > 0) p -= betas(k - 1) * Uk.col(k - 1);
    if (k > 0) reorthogonalize(p, Uk, k);
    alphas(k) = p.norm();
    if (alphas(k) <= 1e-14 * scale)
      throw numerical_error("truncated_svd_lanczos: breakdown at iteration " +
                            std::to_string(k) + " (rank deficiency below requested rank)");
    Uk.col(k) = p / alphas(k);

    // r = A^T u_k - alpha_k v_k, beta_k = ||r||
    r.noalias() = A.transpose() * Uk.col(k);
    r -= alphas(k) * Vk.col(k);
    reorthogonalize(r, Vk, k + 1);
    betas(k) = r.norm();
    ++k;

    const bool space_exhausted = betas(k - 1) <= 1e-14 * scale;
    if (!space_exhausted && k < max_iter) Vk.col(k) = r / betas(k - 1);

    // Convergence check on the Ritz values of the k x k bidiagonal block.
    if (k >= kdim || space_exhausted || k == max_iter) {
      Matrix B = Matrix::Zero(k, k);
      for (int i = 0; i < k; ++i) {
        B(i, i) = alphas(i);
        if (i + 1 < k) B(i, i + 1) = betas(i);
      }
      Eigen::JacobiSVD<Matrix> small(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double sigma_max = small.singularValues()(0);
      if (k >= rank) {
        bool converged = true;
        for (int i = 0; i < rank; ++i) {
          // A^T u_hat_i - sigma_i v_hat_i = beta_{k-1} P(k-1,i) v_k
          const double resid = space_exhausted
                                   ? 0.0
                                   : betas(k - 1) * std::abs(small.matrixU()(k - 1, i));
          if (resid > options.tolerance * std::max(sigma_max, 1e-300)) {
            converged = false;
            break;
          }
        }
        if (converged || space_exhausted || k == max_iter) {
          if (!converged && !space_exhausted && k == max_iter)
            throw numerical_error("truncated_svd_lanczos: no convergence after " +
                                  std::to_string(k) + " iterations");
          out.U.noalias() = Uk.leftCols(k) * small.matrixU().leftCols(rank);
          out.V.noalias() = Vk.leftCols(k) * small.matrixV().leftCols(rank);
          out.sigma = small.singularValues().head(rank);
          out.iterations = k;
          apply_sign_convention(out.U, out.V);
          return out;
        }
      }
      if (space_exhausted)
        throw numerical_error("truncated_svd_lanczos: Krylov space exhausted at " +
                              std::to_string(k) + " before rank " + std::to_string(rank));
    }
  }
  throw numerical_error("truncated_svd_lanczos: iteration budget exhausted");
}

SvdResult truncated_svd(const Matrix& A, int rank) {
  if (A.rows() * A.cols() > kDenseEntryLimit) return truncated_svd_lanczos(A, rank);
  return truncated_svd_dense(A, rank);
}

SpectrumReport select_dimension(const Matrix& A, int k_max) {
  if (k_max < 1 || k_max > std::min(A.rows(), A.cols()))
    throw argument_error("select_dimension: k_max outside [1, min dims]");
  Vector sv;
  if (A.rows() * A.cols() > kDenseEntryLimit) {
    // Gap inspection tolerates looser Ritz accuracy than factor extraction.
    LanczosOptions opts;
    opts.tolerance = 1e-8;
    opts.extra_vectors = 15;
    sv = truncated_svd_lanczos(A, k_max, opts).sigma;
  } else {
    Eigen::BDCSVD<Matrix> svd(A);
    sv = svd.singularValues().head(k_max);
  }

  SpectrumReport report;
  report.leading_singular_values = sv;
  const double top = sv(0);
  if (top <= 0.0 || (top - sv(k_max - 1)) <= 1e-12 * top) {
    report.flat_warning = true;
    report.chosen_d = k_max;
    for (int i = 0; i + 1 < k_max; ++i) report.gap_ratios.push_back(1.0);
    return report;
  }
  int best = 1;
  double best_ratio = -1.0;
  for (int i = 0; i + 1 < k_max; ++i) {
    const double ratio = sv(i + 1) > 0.0 ? sv(i) / sv(i + 1)
                                         : std::numeric_limits<double>::infinity();
    report.gap_ratios.push_back(ratio);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i + 1;
    }
  }
  report.chosen_d = best;
  return report;
}

}  // namespace mplex
