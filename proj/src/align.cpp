#include "mplex/align.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace mplex {

double two_to_infinity_norm(const Matrix& A) {
  if (A.rows() == 0) return 0.0;
  return A.rowwise().norm().maxCoeff();
}

Matrix orthogonal_procrustes(const Matrix& A, const Matrix& B, bool* degenerate) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw argument_error("orthogonal_procrustes: shape mismatch");
  const Matrix S = A.transpose() * B;
  Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (degenerate) {
    const auto& sv = svd.singularValues();
    *degenerate = sv(sv.size() - 1) <= 1e-12 * std::max(sv(0), 1e-300);
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix alignment_W(const Matrix& U_bar, const Matrix& U_hat, const Matrix& V_bar,
                   const Matrix& V_hat) {
  auto check_orthonormal = [](const Matrix& M, const char* name) {
    const Matrix G = M.transpose() * M;
    const double dev = (G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-6)
      throw argument_error(std::string("alignment_W: ") + name +
                           " does not have orthonormal columns (deviation " +
                           std::to_string(dev) + ")");
  };
  check_orthonormal(U_bar, "U_bar");
  check_orthonormal(U_hat, "U_hat");
  check_orthonormal(V_bar, "V_bar");
  check_orthonormal(V_hat, "V_hat");
  if (U_bar.cols() != U_hat.cols() || V_bar.cols() != V_hat.cols() ||
      U_bar.cols() != V_bar.cols() || U_bar.rows() != U_hat.rows() ||
      V_bar.rows() != V_hat.rows())
    throw argument_error("alignment_W: dimension mismatch");

  const Matrix S = U_bar.transpose() * U_hat + V_bar.transpose() * V_hat;
  Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

KlrTransforms klr_transforms(const BinnedPositions& x_tilde, const Matrix& Y,
                             const SvdResult& mean_svd) {
  const int d = int(mean_svd.sigma.size());
  const Vector scale = mean_svd.sigma.cwiseSqrt();
  const Matrix x_bar = mean_svd.U * scale.asDiagonal();
  const Matrix y_bar = mean_svd.V * scale.asDiagonal();
  if (x_tilde.data.cols() != d || Y.cols() != d)
    throw argument_error("klr_transforms: column counts must match the SVD rank");
  if (x_tilde.data.rows() != x_bar.rows() || Y.rows() != y_bar.rows())
    throw argument_error("klr_transforms: row counts do not match the SVD factors");

  Eigen::ColPivHouseholderQR<Matrix> qr_x(x_tilde.data);
  if (qr_x.rank() < d) throw numerical_error("klr_transforms: X_tilde is rank deficient");
  KlrTransforms out;
  out.K = qr_x.solve(x_bar);

  Eigen::ColPivHouseholderQR<Matrix> qr_y(Y);
  if (qr_y.rank() < d) throw numerical_error("klr_transforms: Y is rank deficient");
  out.R = qr_y.solve(y_bar);

  const double res_x = (x_tilde.data * out.K - x_bar).norm();
  const double res_y = (Y * out.R - y_bar).norm();
  if (res_x > 1e-8 * x_bar.norm() || res_y > 1e-8 * y_bar.norm())
    throw numerical_error(
        "klr_transforms: inputs do not factor the mean exactly (residuals " +
        std::to_string(res_x) + ", " + std::to_string(res_y) + ")");
  const double identity_dev =
      (out.K * out.R.transpose() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (identity_dev > 1e-8)
    throw numerical_error("klr_transforms: K R^T deviates from identity by " +
                          std::to_string(identity_dev));
  return out;
}

GroundTruth make_ground_truth(const LatentModel& model, int n_bins, int rank) {
  GroundTruth truth;
  truth.model = &model;
  auto [mean, pos] = exact_binned_mean(model, n_bins);
  truth.lambda_bar = std::move(mean);
  truth.x_tilde = std::move(pos);
  truth.mean_svd = truncated_svd(truth.lambda_bar.data, rank);
  truth.klr = klr_transforms(truth.x_tilde, model.layer_positions(), truth.mean_svd);
  return truth;
}

AlignmentReport recovery_error(const Embedding& embedding, const GroundTruth& truth,
                               AlignMode mode, int sup_grid) {
  if (truth.model == nullptr) throw argument_error("recovery_error: truth has no model");
  if (sup_grid < 2) throw argument_error("recovery_error: sup_grid >= 2");
  const int d = embedding.dim;
  const int M = embedding.n_bins;
  const Matrix& Y = truth.model->layer_positions();
  if (truth.x_tilde.data.rows() != embedding.left.rows() ||
      Y.rows() != embedding.right.rows() || truth.x_tilde.data.cols() != d)
    throw argument_error("recovery_error: dimension mismatch between estimate and truth");

  AlignmentReport report;
  report.mode = mode;
  report.sup_grid = sup_grid;
  report.W = Matrix::Identity(d, d);

  switch (mode) {
    case AlignMode::appendix_w: {
      if (truth.lambda_bar.kind != IntensityKind::exact_mean)
        throw argument_error("recovery_error: appendix-W mode needs exact-mean truth");
      report.W = alignment_W(truth.mean_svd.U, embedding.factor_u(), truth.mean_svd.V,
                             embedding.factor_v());
      // W_X = W^{-1} K^{-1}, W_Y = W^{-1} R^{-1}; W is orthogonal.
      report.W_X = report.W.transpose() *
                   truth.klr.K.partialPivLu().solve(Matrix::Identity(d, d));
      report.W_Y = report.W.transpose() *
                   truth.klr.R.partialPivLu().solve(Matrix::Identity(d, d));
      break;
    }
    case AlignMode::procrustes_global: {
      bool degenerate = false;
      report.W_X = orthogonal_procrustes(embedding.left, truth.x_tilde.data, &degenerate);
      report.procrustes_degenerate = degenerate;
      report.W_Y = orthogonal_procrustes(embedding.right, Y, &degenerate);
      report.procrustes_degenerate |= degenerate;
      break;
    }
    case AlignMode::procrustes_per_bin: {
      report.per_bin_Q.resize(M);
      for (int m = 0; m < M; ++m) {
        bool degenerate = false;
        report.per_bin_Q[m] = orthogonal_procrustes(embedding.left_block(m),
                                                    truth.x_tilde.block(m), &degenerate);
        report.procrustes_degenerate |= degenerate;
      }
      report.W_X = report.per_bin_Q[0];
      report.W_Y = orthogonal_procrustes(embedding.right, Y, nullptr);
      break;
    }
  }

  auto bin_transform = [&](int m) -> const Matrix& {
    return mode == AlignMode::procrustes_per_bin ? report.per_bin_Q[m] : report.W_X;
  };

  double err_x = 0.0;
  for (int m = 0; m < M; ++m)
    err_x = std::max(err_x, two_to_infinity_norm(embedding.left_block(m) * bin_transform(m) -
                                                 truth.x_tilde.block(m)));
  report.err_x = err_x;
  report.err_y = two_to_infinity_norm(embedding.right * report.W_Y - Y);

  // Continuous-time error and bias on a per-bin grid. The left bin endpoint
  // belongs to the previous bin, so points sit strictly inside, up to and
  // including the right endpoint.
  double err_cont = 0.0, err_bias = 0.0;
  for (int m = 0; m < M; ++m) {
    const Matrix aligned = embedding.left_block(m) * bin_transform(m);
    const auto x_bar_block = truth.x_tilde.block(m);
    for (int k = 1; k <= sup_grid; ++k) {
      const double t = (double(m) + double(k) / sup_grid) / M;
      const Matrix x_t = truth.model->trajectory().eval(t);
      err_cont = std::max(err_cont, two_to_infinity_norm(aligned - x_t));
      err_bias = std::max(err_bias, two_to_infinity_norm(x_bar_block - x_t));
    }
  }
  report.err_x_continuous = err_cont;
  report.err_x_bias = err_bias;
  return report;
}

Matrix trajectory_projector(const LatentModel& model, double t) {
  const Matrix X = model.trajectory().eval(t);
  const Matrix G = X.transpose() * X;
  Eigen::LDLT<Matrix> ldlt(G);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw numerical_error("trajectory_projector: X(t)^T X(t) singular at t=" +
                          std::to_string(t));
  return X * ldlt.solve(X.transpose());
}

namespace {

double incoherence(const Matrix& A) {
  // mu(A) = max{ n/d ||U||^2_{2,inf}, m/d ||V||^2_{2,inf} } from the skinny SVD.
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double d = double(A.cols());
  const double nu = double(A.rows()) / d * std::pow(two_to_infinity_norm(svd.matrixU()), 2);
  const double mv = double(A.cols()) / d * std::pow(two_to_infinity_norm(svd.matrixV()), 2);
  return std::max(nu, mv);
}

double condition_number(const Matrix& A) {
  Eigen::BDCSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  return sv(0) / sv(sv.size() - 1);
}

// Orthonormal basis of the column space.
Matrix orth_basis(const Matrix& X) {
  Eigen::HouseholderQR<Matrix> qr(X);
  Matrix Q = qr.householderQ() * Matrix::Identity(X.rows(), X.cols());
  return Q;
}

}  // namespace

AssumptionDiagnostics assumption_diagnostics(const BinnedPositions& x_tilde,
                                             const Matrix& Y, const LatentModel& model,
                                             int grid) {
  if (grid < 2) throw argument_error("assumption_diagnostics: grid >= 2");
  AssumptionDiagnostics diag;
  diag.grid = grid;
  diag.moment_x = x_tilde.data.transpose() * x_tilde.data / double(x_tilde.data.rows());
  diag.moment_y = Y.transpose() * Y / double(Y.rows());
  diag.kappa_x = condition_number(x_tilde.data);
  diag.kappa_y = condition_number(Y);
  diag.mu_x = incoherence(x_tilde.data);
  diag.mu_y = incoherence(Y);

  const auto& traj = model.trajectory();
  const int d = model.dim();
  Matrix prev = traj.eval(0.0);
  Matrix prev_basis;
  bool prev_ok = true;
  {
    Eigen::ColPivHouseholderQR<Matrix> qr(prev);
    prev_ok = qr.rank() == d;
    if (prev_ok) prev_basis = orth_basis(prev);
    else diag.projector_degenerate = true;
  }
  const double dt = 1.0 / grid;
  for (int k = 1; k <= grid; ++k) {
    const double t = double(k) / grid;
    const Matrix cur = traj.eval(t);
    diag.lipschitz_x = std::max(diag.lipschitz_x, two_to_infinity_norm(cur - prev) / dt);

    Eigen::ColPivHouseholderQR<Matrix> qr(cur);
    const bool cur_ok = qr.rank() == d;
    if (!cur_ok) diag.projector_degenerate = true;
    if (cur_ok && prev_ok) {
      const Matrix cur_basis = orth_basis(cur);
      // ||P(t)-P(s)||_2 = sin(theta_max) between equal-rank column spaces
      Eigen::JacobiSVD<Matrix> angles(prev_basis.transpose() * cur_basis);
      const double c = std::min(1.0, angles.singularValues().minCoeff());
      diag.lipschitz_subspace =
          std::max(diag.lipschitz_subspace, std::sqrt(1.0 - c * c) / dt);
      // ||P(t)(X(t)-X(s))||_{2,inf}
      const Matrix diff = cur - prev;
      const Matrix projected = cur_basis * (cur_basis.transpose() * diff);
      diag.lipschitz_coord =
          std::max(diag.lipschitz_coord, two_to_infinity_norm(projected) / dt);
      prev_basis = cur_basis;
    } else if (cur_ok) {
      prev_basis = orth_basis(cur);
    }
    prev_ok = cur_ok;
    prev = cur;
  }
  return diag;
}

LipschitzLadder lipschitz_refinement(const LatentModel& model, int base_grid, int steps,
                                     int factor) {
  if (base_grid < 2 || steps < 1 || factor < 2)
    throw argument_error("lipschitz_refinement: invalid ladder parameters");
  LipschitzLadder ladder;
  const auto& traj = model.trajectory();
  int grid = base_grid;
  for (int s = 0; s <= steps; ++s) {
    double est = 0.0;
    const double dt = 1.0 / grid;
    Matrix prev = traj.eval(0.0);
    for (int k = 1; k <= grid; ++k) {
      const Matrix cur = traj.eval(double(k) / grid);
      est = std::max(est, two_to_infinity_norm(cur - prev) / dt);
      prev = cur;
    }
    ladder.grids.push_back(grid);
    ladder.estimates.push_back(est);
    grid *= factor;
  }
  ladder.growth = ladder.estimates.back() / std::max(ladder.estimates.front(), 1e-300);
  ladder.violation = ladder.growth >= 10.0;
  return ladder;
}

RateFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw argument_error("fit_log_log: need matching inputs with >= 2 points");
  const int n = int(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw argument_error("fit_log_log: inputs must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; syy += ly * ly;
  }
  const double den = n * sxx - sx * sx;
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (int i = 0; i < n; ++i) {
    const double ly = std::log(y[i]);
    const double pred = fit.intercept + fit.slope * std::log(x[i]);
    ss_res += (ly - pred) * (ly - pred);
    ss_tot += (ly - mean_y) * (ly - mean_y);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace mplex
