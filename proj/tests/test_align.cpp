#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mplex/align.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using namespace mplex;

TEST_CASE("two-to-infinity norm") {
  Matrix A(2, 2);
  A << 3, 4, 0, 1;
  CHECK(two_to_infinity_norm(A) == doctest::Approx(5.0));
  CHECK(two_to_infinity_norm(Matrix::Identity(7, 7)) == doctest::Approx(1.0));
  const Matrix R = oracle::random_matrix(7, 3, 17);
  CHECK(two_to_infinity_norm(R) == doctest::Approx(oracle::max_row_norm_loop(R)));
}

TEST_CASE("two-to-infinity norm is right-orthogonal invariant") {
  const Matrix A = oracle::random_matrix(20, 4, 3);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix Q = oracle::random_orthogonal(4, seed);
    CHECK(two_to_infinity_norm(A * Q) ==
          doctest::Approx(two_to_infinity_norm(A)).epsilon(1e-12));
  }
}

TEST_CASE("procrustes: identity, recovery, randomized optimality") {
  const Matrix A = oracle::random_matrix(30, 4, 7);
  CHECK((orthogonal_procrustes(A, A) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <=
        1e-10);

  const Matrix Q0 = oracle::random_orthogonal(4, 31);
  const Matrix Q = orthogonal_procrustes(A, A * Q0);
  CHECK((Q - Q0).cwiseAbs().maxCoeff() <= 1e-8);

  // objective at the returned Q beats 200 random orthogonal probes
  const Matrix B = oracle::random_matrix(30, 4, 8);
  const Matrix Q_opt = orthogonal_procrustes(A, B);
  const double opt = (A * Q_opt - B).norm();
  for (std::uint64_t seed = 100; seed < 300; ++seed)
    CHECK(opt <= (A * oracle::random_orthogonal(4, seed) - B).norm() + 1e-12);

  // rank-deficient cross product flags degeneracy
  Matrix thin = Matrix::Zero(5, 2);
  thin.col(0) = oracle::random_matrix(5, 1, 9);
  bool degenerate = false;
  orthogonal_procrustes(thin, thin, &degenerate);
  CHECK(degenerate);

  CHECK_THROWS_AS(orthogonal_procrustes(Matrix::Zero(3, 2), Matrix::Zero(4, 2)),
                  argument_error);
}

TEST_CASE("alignment W: identity, recovery, joint optimality") {
  const int n = 40, m = 25, d = 3;
  Eigen::HouseholderQR<Matrix> qru(oracle::random_matrix(n, d, 1));
  Eigen::HouseholderQR<Matrix> qrv(oracle::random_matrix(m, d, 2));
  const Matrix U = qru.householderQ() * Matrix::Identity(n, d);
  const Matrix V = qrv.householderQ() * Matrix::Identity(m, d);

  CHECK((alignment_W(U, U, V, V) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10);

  const Matrix Q0 = oracle::random_orthogonal(d, 77);
  const Matrix W = alignment_W(U, U * Q0, V, V * Q0);
  CHECK((W - Q0).cwiseAbs().maxCoeff() <= 1e-8);

  // joint objective at W is no worse than at the one-sided procrustes fits
  const Matrix U_hat = U * Q0;
  const Matrix V_hat = V * oracle::random_orthogonal(d, 78);
  const Matrix W_joint = alignment_W(U, U_hat, V, V_hat);
  auto objective = [&](const Matrix& T) {
    return std::pow((U.transpose() * U_hat - T).norm(), 2) +
           std::pow((V.transpose() * V_hat - T).norm(), 2);
  };
  CHECK(objective(W_joint) <= objective(orthogonal_procrustes(U, U_hat)) + 1e-10);
  CHECK(objective(W_joint) <= objective(orthogonal_procrustes(V, V_hat)) + 1e-10);

  CHECK_THROWS_AS(alignment_W(oracle::random_matrix(n, d, 5), U, V, V), argument_error);
}

TEST_CASE("K/R transforms: identity, scalar case, inverse-transpose identity") {
  const LatentModel model = testmodels::three_group_model(15, 3);
  const GroundTruth truth = make_ground_truth(model, 4, 2);

  // K R^T = I holds by construction (klr_transforms verifies internally)
  CHECK((truth.klr.K * truth.klr.R.transpose() - Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() <= 1e-8);

  // feeding the SVD factor itself as the truth gives K = I
  BinnedPositions as_truth;
  as_truth.n_nodes = 15;
  as_truth.n_bins = 4;
  as_truth.data = truth.mean_svd.U * truth.mean_svd.sigma.cwiseSqrt().asDiagonal();
  const Matrix y_bar = truth.mean_svd.V * truth.mean_svd.sigma.cwiseSqrt().asDiagonal();
  const KlrTransforms self = klr_transforms(as_truth, y_bar, truth.mean_svd);
  CHECK((self.K - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((self.R - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);

  // scalar case: doubling the claimed truth halves K
  BinnedPositions doubled = as_truth;
  doubled.data *= 2.0;
  const KlrTransforms half = klr_transforms(doubled, Matrix(0.5 * y_bar), truth.mean_svd);
  CHECK((half.K - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((half.R - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("klr rejects inconsistent inputs") {
  const LatentModel model = testmodels::three_group_model(10, 2);
  const GroundTruth truth = make_ground_truth(model, 3, 2);
  BinnedPositions wrong = truth.x_tilde;
  wrong.data = oracle::random_matrix(int(wrong.data.rows()), 2, 55);
  CHECK_THROWS_AS(klr_transforms(wrong, truth.model->layer_positions(), truth.mean_svd),
                  numerical_error);
}

TEST_CASE("noiseless recovery reduces to the bias term") {
  const LatentModel model = testmodels::three_group_model(30, 3);
  const GroundTruth truth = make_ground_truth(model, 8, 2);
  const Embedding noiseless = duase(truth.lambda_bar, 2);
  const AlignmentReport report = recovery_error(noiseless, truth, AlignMode::appendix_w);
  CHECK(report.err_x <= 1e-6);
  CHECK(report.err_y <= 1e-6);
  // with no estimation noise the continuous error is the bias alone
  CHECK(std::abs(report.err_x_continuous - report.err_x_bias) <= 1e-6);
  CHECK(report.err_x_bias > 0.0);
}

TEST_CASE("constant model has zero bias at any bin count") {
  // two constant groups with independent positions keep rank 2
  auto traj = std::make_shared<BlockTrajectory>(
      std::vector<int>{0, 0, 0, 1, 1, 1},
      std::vector<DynamicGroupParams>{{2.0, 3.0, 0.0, 0.0}, {4.0, 1.0, 0.0, 0.0}},
      std::nullopt);
  Matrix Y(6, 2);
  for (int j = 0; j < 6; ++j) Y.row(j) << 1.0 + 0.1 * j, 0.2 + 0.3 * j;
  const LatentModel model(traj, Y, 1);
  const GroundTruth truth = make_ground_truth(model, 5, 2);
  const Embedding noiseless = duase(truth.lambda_bar, 2);
  const AlignmentReport report = recovery_error(noiseless, truth, AlignMode::appendix_w);
  CHECK(report.err_x_bias <= 1e-12);
  CHECK(report.err_x <= 1e-9);
}

TEST_CASE("appendix-W mode requires exact-mean truth") {
  const LatentModel model = testmodels::three_group_model(10, 2);
  GroundTruth truth = make_ground_truth(model, 3, 2);
  const Embedding e = duase(sample_binned(model, 3, 3), 2);
  truth.lambda_bar.kind = IntensityKind::empirical;
  CHECK_THROWS_AS(recovery_error(e, truth, AlignMode::appendix_w), argument_error);
}

TEST_CASE("procrustes modes run and report finite errors") {
  const LatentModel model = testmodels::three_group_model(20, 2);
  const GroundTruth truth = make_ground_truth(model, 5, 2);
  const Embedding e = duase(sample_binned(model, 11, 5), 2);
  for (AlignMode mode : {AlignMode::procrustes_global, AlignMode::procrustes_per_bin}) {
    const AlignmentReport report = recovery_error(e, truth, mode);
    CHECK(std::isfinite(report.err_x));
    CHECK(std::isfinite(report.err_y));
    CHECK(report.err_x > 0.0);
    if (mode == AlignMode::procrustes_per_bin) CHECK(report.per_bin_Q.size() == 5);
  }
  // per-bin alignment can only improve the binwise fit
  const double global_err = recovery_error(e, truth, AlignMode::procrustes_global).err_x;
  const double per_bin_err = recovery_error(e, truth, AlignMode::procrustes_per_bin).err_x;
  CHECK(per_bin_err <= global_err + 1e-9);
}

TEST_CASE("factor gauge changes leave the reconstruction unchanged") {
  // scaling left factors by s and right by 1/s leaves the product unchanged
  const LatentModel model = testmodels::three_group_model(12, 2);
  const UnfoldedIntensity lam = sample_binned(model, 2, 4);
  Embedding e = duase(lam, 2);
  Embedding rescaled = e;
  rescaled.left *= 3.0;
  rescaled.right /= 3.0;
  CHECK((rescaled.left * rescaled.right.transpose() - e.left * e.right.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-9 * e.singular_values(0));
}

TEST_CASE("assumption diagnostics: constant model has zero Lipschitz estimates") {
  const LatentModel model = testmodels::constant_model(5, 2.0, 1.0, 1.0);
  const auto [mean, positions] = exact_binned_mean(model, 4);
  const AssumptionDiagnostics diag =
      assumption_diagnostics(positions, model.layer_positions(), model, 50);
  CHECK(diag.lipschitz_x == 0.0);
  CHECK(diag.lipschitz_coord == 0.0);
  CHECK(diag.moment_x(0, 0) == doctest::Approx(4.0));
  CHECK(diag.kappa_y > 0.0);
}

TEST_CASE("assumption diagnostics: smooth model has bounded estimates") {
  const LatentModel model = testmodels::three_group_model(20, 3);
  const auto [mean, positions] = exact_binned_mean(model, 10);
  const AssumptionDiagnostics diag =
      assumption_diagnostics(positions, model.layer_positions(), model, 100);
  // speed bound: 2 pi R_max with R_max = 15
  CHECK(diag.lipschitz_x <= 2 * M_PI * 15.0 * 1.01);
  CHECK(diag.lipschitz_x > 10.0);
  CHECK_FALSE(diag.projector_degenerate);
  CHECK(diag.mu_x >= 1.0);
  CHECK(diag.kappa_x >= 1.0);
}

TEST_CASE("jump models blow up the difference quotient across a breakpoint") {
  const int n = 10;
  const LatentModel model = testmodels::stepped_three_group_model(n, 1);
  const auto [mean, positions] = exact_binned_mean(model, 10);
  const int grid = 100;
  const AssumptionDiagnostics diag =
      assumption_diagnostics(positions, model.layer_positions(), model, grid);
  // a level change of at least 0.4 * radius lands inside one grid step
  CHECK(diag.lipschitz_x >= 0.4 * 5.0 * grid);

  const LipschitzLadder ladder = lipschitz_refinement(model, 25, 2, 4);
  CHECK(ladder.violation);
  CHECK(ladder.growth >= 10.0);
  // smooth control stays put
  const LipschitzLadder smooth =
      lipschitz_refinement(testmodels::three_group_model(n, 1), 25, 2, 4);
  CHECK_FALSE(smooth.violation);
  CHECK(smooth.growth < 2.0);
}

TEST_CASE("projector is symmetric idempotent at evaluated times") {
  const LatentModel model = testmodels::three_group_model(9, 1);
  for (double t : {0.0, 0.31, 0.77, 1.0}) {
    const Matrix P = trajectory_projector(model, t);
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((P * P - P).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("log-log rate fit recovers a planted slope") {
  std::vector<double> x{100, 200, 400, 800};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  const RateFit fit = fit_log_log(x, y);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}
