#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

SvdTriplet jacobi_svd(const Matrix& A_in) {
  const bool transposed = A_in.rows() < A_in.cols();
  Matrix A = transposed ? A_in.transpose() : A_in;
  const int n = int(A.cols());
  Matrix V = Matrix::Identity(n, n);

  // Sweep until every column pair is orthogonal to working precision.
  const double tol = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double app = A.col(p).squaredNorm();
        const double aqq = A.col(q).squaredNorm();
        const double apq = A.col(p).dot(A.col(q));
        if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
        off = std::max(off, std::abs(apq) / std::sqrt(std::max(app * aqq, 1e-300)));
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int r = 0; r < A.rows(); ++r) {
          const double ap = A(r, p);
          A(r, p) = c * ap - s * A(r, q);
          A(r, q) = s * ap + c * A(r, q);
        }
        for (int r = 0; r < n; ++r) {
          const double vp = V(r, p);
          V(r, p) = c * vp - s * V(r, q);
          V(r, q) = s * vp + c * V(r, q);
        }
      }
    }
    if (off == 0.0) break;
  }

  Vector sigma(n);
  Matrix U(A.rows(), n);
  for (int k = 0; k < n; ++k) {
    sigma(k) = A.col(k).norm();
    U.col(k) = sigma(k) > 0 ? Vector(A.col(k) / sigma(k)) : Vector::Zero(A.rows());
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sigma(a) > sigma(b); });
  SvdTriplet out;
  out.sigma.resize(n);
  out.U.resize(U.rows(), n);
  out.V.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.sigma(k) = sigma(order[k]);
    out.U.col(k) = U.col(order[k]);
    out.V.col(k) = V.col(order[k]);
  }
  if (transposed) std::swap(out.U, out.V);
  return out;
}

double max_row_norm_loop(const Matrix& A) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) acc += A(i, j) * A(i, j);
    best = std::max(best, std::sqrt(acc));
  }
  return best;
}

Matrix covariance_C_loop(const Matrix& x_tilde, const Matrix& Y, int n_nodes, int i,
                         int m) {
  const int d = int(Y.cols());
  Matrix C = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < Y.rows(); ++j) {
    double lam = 0.0;
    for (int k = 0; k < d; ++k) lam += x_tilde(Eigen::Index(m) * n_nodes + i, k) * Y(j, k);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) C(a, b) += lam * Y(j, a) * Y(j, b);
  }
  return C / double(Y.rows());
}

Matrix covariance_D_loop(const Matrix& x_tilde, const Matrix& Y, int n_nodes, int i,
                         int l) {
  const int d = int(Y.cols());
  Matrix D = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < x_tilde.rows(); ++j) {
    double lam = 0.0;
    for (int k = 0; k < d; ++k) lam += x_tilde(j, k) * Y(Eigen::Index(l) * n_nodes + i, k);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) D(a, b) += lam * x_tilde(j, a) * x_tilde(j, b);
  }
  return D / double(x_tilde.rows());
}

Matrix trajectory_distances_loop(const std::vector<Matrix>& series) {
  const int n = int(series.size());
  Matrix D = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < series[i].rows(); ++r)
        for (Eigen::Index c = 0; c < series[i].cols(); ++c) {
          const double diff = series[i](r, c) - series[j](r, c);
          acc += diff * diff;
        }
      D(i, j) = std::sqrt(acc);
    }
  return D;
}

double ari_pair_loop(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = int(a.size());
  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      n11 += sa && sb;
      n00 += !sa && !sb;
      n10 += sa && !sb;
      n01 += !sa && sb;
    }
  const double total = n11 + n00 + n10 + n01;
  const double index = n11;
  const double expected = (n11 + n10) * (n11 + n01) / total;
  const double max_index = 0.5 * ((n11 + n10) + (n11 + n01));
  if (max_index == expected) return (n10 == 0 && n01 == 0) ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

double standard_normal(mplex::Rng& rng) {
  double u1 = rng.next_uniform();
  while (u1 <= 0.0) u1 = rng.next_uniform();
  const double u2 = rng.next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  mplex::Rng rng(seed);
  Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = standard_normal(rng);
  return A;
}

Matrix random_orthogonal(int d, std::uint64_t seed) {
  const Matrix G = random_matrix(d, d, seed);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
  // fix signs so the factorization is unique-ish
  for (int k = 0; k < d; ++k)
    if (qr.matrixQR()(k, k) < 0) Q.col(k) = -Q.col(k);
  return Q;
}

}  // namespace oracle
