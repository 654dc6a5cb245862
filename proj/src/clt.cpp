#include "mplex/clt.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mplex/stats.hpp"

namespace mplex {

Matrix inverse_sqrt_spd(const Matrix& S, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success)
    throw numerical_error("inverse_sqrt_spd: eigendecomposition failed");
  const Vector& w = eig.eigenvalues();
  if (w.minCoeff() <= floor)
    throw numerical_error("inverse_sqrt_spd: eigenvalue " + std::to_string(w.minCoeff()) +
                          " at or below floor " + std::to_string(floor));
  return eig.eigenvectors() * w.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

namespace {

void check_pd(const Matrix& S, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw numerical_error(what + ": matrix not positive definite (rank preservation violated)");
}

}  // namespace

Matrix covariance_C(const BinnedPositions& x_tilde, const Matrix& Y, int i, int m) {
  const int d = int(Y.cols());
  const Eigen::Index rows_y = Y.rows();
  if (i < 0 || i >= x_tilde.n_nodes || m < 0 || m >= x_tilde.n_bins)
    throw argument_error("covariance_C: index out of range");
  const RowVector x_row = x_tilde.data.row(Eigen::Index(m) * x_tilde.n_nodes + i);
  Matrix C = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < rows_y; ++j) {
    const double w = x_row.dot(Y.row(j));
    C.noalias() += w * (Y.row(j).transpose() * Y.row(j));
  }
  C /= double(rows_y);
  check_pd(C, "covariance_C(i=" + std::to_string(i) + ",m=" + std::to_string(m) + ")");
  return C;
}

Matrix covariance_D(const BinnedPositions& x_tilde, const Matrix& Y, int i, int l) {
  const int d = int(Y.cols());
  const int n = x_tilde.n_nodes;
  if (i < 0 || i >= n || l < 0 || Eigen::Index(l + 1) * n > Y.rows())
    throw argument_error("covariance_D: index out of range");
  const RowVector y_row = Y.row(Eigen::Index(l) * n + i);
  Matrix D = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < x_tilde.data.rows(); ++j) {
    const double w = x_tilde.data.row(j).dot(y_row);
    D.noalias() += w * (x_tilde.data.row(j).transpose() * x_tilde.data.row(j));
  }
  D /= double(x_tilde.data.rows());
  check_pd(D, "covariance_D(i=" + std::to_string(i) + ",l=" + std::to_string(l) + ")");
  return D;
}

StudentizedResiduals studentize(const Embedding& embedding, const GroundTruth& truth,
                                const AlignmentReport& alignment, Side side) {
  if (alignment.mode != AlignMode::appendix_w)
    throw argument_error("studentize: appendix-W alignment required");
  if (truth.model == nullptr) throw argument_error("studentize: truth has no model");
  const int N = embedding.n_nodes;
  const int M = embedding.n_bins;
  const int L = embedding.n_layers;
  const int d = embedding.dim;
  const Matrix& Y = truth.model->layer_positions();

  StudentizedResiduals out;
  out.side = side;
  out.n_nodes = N;
  out.n_bins = M;
  out.n_layers = L;

  if (side == Side::left_x) {
    const Matrix Qy = Y.transpose() * Y / double(Y.rows());
    const Matrix Qy_inv = Qy.inverse();
    const Matrix residual = embedding.left * alignment.W_X - truth.x_tilde.data;
    const double scale = std::sqrt(double(N) * L / double(M));
    out.z.resize(residual.rows(), d);
    out.scalings.resize(residual.rows());
    for (int m = 0; m < M; ++m) {
      for (int i = 0; i < N; ++i) {
        const Eigen::Index r = Eigen::Index(m) * N + i;
        Matrix S;
        try {
          S = inverse_sqrt_spd(Qy_inv * covariance_C(truth.x_tilde, Y, i, m) * Qy_inv);
        } catch (const numerical_error& e) {
          throw numerical_error("studentize: row (i=" + std::to_string(i) + ", m=" +
                                std::to_string(m) + "): " + e.what());
        }
        out.z.row(r) = scale * (S * residual.row(r).transpose()).transpose();
        out.scalings[r] = std::move(S);
      }
    }
  } else {
    const Matrix Qx = truth.x_tilde.data.transpose() * truth.x_tilde.data /
                      double(truth.x_tilde.data.rows());
    const Matrix Qx_inv = Qx.inverse();
    const Matrix residual = embedding.right * alignment.W_Y - Y;
    const double scale = std::sqrt(double(N));  // sqrt(NM/M)
    out.z.resize(residual.rows(), d);
    out.scalings.resize(residual.rows());
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < N; ++i) {
        const Eigen::Index r = Eigen::Index(l) * N + i;
        Matrix S;
        try {
          S = inverse_sqrt_spd(Qx_inv * covariance_D(truth.x_tilde, Y, i, l) * Qx_inv);
        } catch (const numerical_error& e) {
          throw numerical_error("studentize: row (i=" + std::to_string(i) + ", l=" +
                                std::to_string(l) + "): " + e.what());
        }
        out.z.row(r) = scale * (S * residual.row(r).transpose()).transpose();
        out.scalings[r] = std::move(S);
      }
    }
  }
  if (!out.z.allFinite()) throw numerical_error("studentize: nonfinite residual");
  return out;
}

NormalityReport normality_report(const StudentizedResiduals& residuals) {
  const Eigen::Index n = residuals.z.rows();
  const Eigen::Index d = residuals.z.cols();
  if (n < 100) throw argument_error("normality_report: need at least 100 residual rows");

  NormalityReport report;
  report.n_rows = n;
  report.coverage.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    report.coverage(k) =
        double((residuals.z.col(k).array().abs() <= 1.96).count()) / double(n);
  }
  report.pooled_covariance = residuals.z.transpose() * residuals.z / double(n);
  report.max_abs_deviation =
      (report.pooled_covariance - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  report.degenerate = residuals.z.cwiseAbs().maxCoeff() == 0.0;

  std::vector<double> sq(n);
  for (Eigen::Index r = 0; r < n; ++r) sq[r] = residuals.z.row(r).squaredNorm();
  std::sort(sq.begin(), sq.end());
  report.chi_squared_ks =
      ks_statistic(std::move(sq), [&](double x) { return chi_squared_cdf(x, int(d)); });
  return report;
}

}  // namespace mplex
