#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mplex/clt.hpp"
#include "mplex/stats.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using namespace mplex;

namespace {

BinnedPositions positions_from(const Matrix& data, int n_nodes, int n_bins) {
  BinnedPositions p;
  p.data = data;
  p.n_nodes = n_nodes;
  p.n_bins = n_bins;
  return p;
}

}  // namespace

TEST_CASE("covariance C: hand cases") {
  // d = 1: X row 1, all Y entries 1 -> C = 1
  const BinnedPositions x1 = positions_from(Matrix::Ones(3, 1), 3, 1);
  const Matrix C1 = covariance_C(x1, Matrix::Ones(4, 1), 0, 0);
  CHECK(C1(0, 0) == doctest::Approx(1.0));

  // d = 2: Y rows e1 and e2, X row (1,1) -> C = diag(1/2, 1/2)
  const BinnedPositions x2 = positions_from(Matrix::Ones(2, 2), 2, 1);
  Matrix Y(2, 2);
  Y << 1, 0, 0, 1;
  const Matrix C2 = covariance_C(x2, Y, 0, 0);
  CHECK(C2(0, 0) == doctest::Approx(0.5));
  CHECK(C2(1, 1) == doctest::Approx(0.5));
  CHECK(C2(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("covariance D: hand case and role symmetry") {
  const BinnedPositions x = positions_from(Matrix::Ones(4, 1), 4, 1);
  const Matrix D = covariance_D(x, Matrix::Ones(4, 1), 0, 0);
  CHECK(D(0, 0) == doctest::Approx(1.0));

  // role swap on a transposed toy model: C for (A, B) equals D for (B, A)
  const Matrix A = Matrix(oracle::random_matrix(5, 2, 2).cwiseAbs()).array() + 0.5;
  const Matrix B = Matrix(oracle::random_matrix(5, 2, 3).cwiseAbs()).array() + 0.5;
  const BinnedPositions pa = positions_from(A, 5, 1);
  const BinnedPositions pb = positions_from(B, 5, 1);
  const Matrix C_ab = covariance_C(pa, B, 2, 0);
  const Matrix D_ba = covariance_D(pb, A, 2, 0);
  CHECK((C_ab - D_ba).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("covariances match the naive loop oracle on the reference model") {
  const LatentModel model = testmodels::three_group_model(17, 3);
  const auto [mean, positions] = exact_binned_mean(model, 6);
  const Matrix& Y = model.layer_positions();
  for (auto [i, m] : {std::pair{0, 0}, {7, 3}, {16, 5}}) {
    const Matrix got = covariance_C(positions, Y, i, m);
    const Matrix want = oracle::covariance_C_loop(positions.data, Y, 17, i, m);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * want.cwiseAbs().maxCoeff());
  }
  for (auto [i, l] : {std::pair{0, 0}, {9, 1}, {16, 2}}) {
    const Matrix got = covariance_D(positions, Y, i, l);
    const Matrix want = oracle::covariance_D_loop(positions.data, Y, 17, i, l);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * want.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("singular covariance raises a rank-preservation error") {
  // all Y rows parallel: the weighted outer-product sum is rank 1
  Matrix Y(3, 2);
  Y << 1, 1, 2, 2, 3, 3;
  const BinnedPositions x = positions_from(Matrix::Ones(2, 2), 2, 1);
  CHECK_THROWS_AS(covariance_C(x, Y, 0, 0), numerical_error);
}

TEST_CASE("inverse square root: diagonal case and hard floor") {
  Matrix S(2, 2);
  S << 4, 0, 0, 9;
  const Matrix R = inverse_sqrt_spd(S);
  CHECK(R(0, 0) == doctest::Approx(0.5));
  CHECK(R(1, 1) == doctest::Approx(1.0 / 3.0));
  Matrix singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(inverse_sqrt_spd(singular), numerical_error);
}

TEST_CASE("studentize: zero residual, degenerate report, wrong-mode guard") {
  const LatentModel model = testmodels::three_group_model(12, 3);
  const GroundTruth truth = make_ground_truth(model, 4, 2);
  const Embedding noiseless = duase(truth.lambda_bar, 2);
  const AlignmentReport alignment = recovery_error(noiseless, truth, AlignMode::appendix_w);

  // noiseless input: residuals vanish
  const StudentizedResiduals z = studentize(noiseless, truth, alignment, Side::left_x);
  CHECK(z.z.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(int(z.scalings.size()) == 12 * 4);

  // the normality report flags the all-zero case
  StudentizedResiduals zeros;
  zeros.z = Matrix::Zero(200, 2);
  const NormalityReport degenerate = normality_report(zeros);
  CHECK(degenerate.degenerate);
  CHECK(degenerate.coverage(0) == doctest::Approx(1.0));
  CHECK(degenerate.max_abs_deviation == doctest::Approx(1.0));

  // procrustes alignment is not a valid studentization transform
  const AlignmentReport wrong = recovery_error(noiseless, truth, AlignMode::procrustes_global);
  CHECK_THROWS_AS(studentize(noiseless, truth, wrong, Side::left_x), argument_error);
}

TEST_CASE("studentize applies the isotropic scaling verbatim") {
  // constant rank-2 model; check the stored per-row scaling matrix equals
  // (Qy^-1 C Qy^-1)^{-1/2} computed by hand.
  auto traj = std::make_shared<BlockTrajectory>(
      std::vector<int>{0, 1}, std::vector<DynamicGroupParams>{{1.0, 0.2, 0.0, 0.0},
                                                              {0.2, 1.0, 0.0, 0.0}},
      std::nullopt);
  Matrix Y(2, 2);
  Y << 1.0, 0.25, 0.25, 1.0;
  const LatentModel model(traj, Y, 1);
  const GroundTruth truth = make_ground_truth(model, 2, 2);
  const Embedding noiseless = duase(truth.lambda_bar, 2);
  const AlignmentReport alignment = recovery_error(noiseless, truth, AlignMode::appendix_w);
  const StudentizedResiduals z = studentize(noiseless, truth, alignment, Side::left_x);

  const Matrix Qy = Y.transpose() * Y / double(Y.rows());
  const Matrix C = covariance_C(truth.x_tilde, Y, 0, 0);
  const Matrix Qy_inv = Qy.inverse();
  const Matrix expected = inverse_sqrt_spd(Qy_inv * C * Qy_inv);
  CHECK((z.scalings[0] - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("equivariance: a common latent rotation preserves studentized row norms") {
  const LatentModel model = testmodels::three_group_model(15, 3);
  const int M = 5;
  const GroundTruth truth = make_ground_truth(model, M, 2);
  const UnfoldedIntensity lam = sample_binned(model, 6, M);
  const Embedding e = duase(lam, 2);
  const AlignmentReport alignment = recovery_error(e, truth, AlignMode::appendix_w);
  const StudentizedResiduals base = studentize(e, truth, alignment, Side::left_x);
  const StudentizedResiduals base_y = studentize(e, truth, alignment, Side::right_y);

  // rotate the latent gauge: X Q and Y Q give identical intensities, so the
  // same seed produces the same counts; only the reported frame changes.
  const Matrix Q = oracle::random_orthogonal(2, 123);
  const auto* block = dynamic_cast<const BlockTrajectory*>(&model.trajectory());
  REQUIRE(block != nullptr);
  std::vector<double> times;
  std::vector<Matrix> values;
  for (int k = 0; k <= 256; ++k) {
    const double t = double(k) / 256.0;
    times.push_back(t);
    values.push_back(model.trajectory().eval(t) * Q);
  }
  auto rotated_traj = std::make_shared<TableTrajectory>(times, values);
  const LatentModel rotated(rotated_traj, Matrix(model.layer_positions() * Q),
                            model.n_layers());

  GroundTruth truth_rot;
  truth_rot.model = &rotated;
  // exact rotated truth, not the interpolated table, keeps the comparison sharp
  truth_rot.x_tilde = truth.x_tilde;
  truth_rot.x_tilde.data = truth.x_tilde.data * Q;
  truth_rot.lambda_bar = truth.lambda_bar;
  truth_rot.mean_svd = truncated_svd(truth_rot.lambda_bar.data, 2);
  truth_rot.klr = klr_transforms(truth_rot.x_tilde, rotated.layer_positions(),
                                 truth_rot.mean_svd);

  const Embedding e_rot = duase(lam, 2);  // same observed counts
  const AlignmentReport alignment_rot =
      recovery_error(e_rot, truth_rot, AlignMode::appendix_w);
  const StudentizedResiduals rot = studentize(e_rot, truth_rot, alignment_rot, Side::left_x);
  const StudentizedResiduals rot_y =
      studentize(e_rot, truth_rot, alignment_rot, Side::right_y);

  for (Eigen::Index r = 0; r < base.z.rows(); ++r)
    CHECK(rot.z.row(r).norm() == doctest::Approx(base.z.row(r).norm()).epsilon(1e-8));
  for (Eigen::Index r = 0; r < base_y.z.rows(); ++r)
    CHECK(rot_y.z.row(r).norm() == doctest::Approx(base_y.z.row(r).norm()).epsilon(1e-8));
}

TEST_CASE("normality report on synthetic draws") {
  mplex::Rng rng(2024);
  const int n = 10000;
  StudentizedResiduals z;
  z.z.resize(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k) z.z(i, k) = oracle::standard_normal(rng);

  const NormalityReport report = normality_report(z);
  CHECK(report.coverage(0) > 0.94);
  CHECK(report.coverage(0) < 0.96);
  CHECK(report.coverage(1) > 0.94);
  CHECK(report.coverage(1) < 0.96);
  CHECK(report.max_abs_deviation < 0.05);
  CHECK(report.chi_squared_ks < 0.02);
  CHECK_FALSE(report.degenerate);

  // doubling the scale drops coverage to about 2 Phi(0.98) - 1 = 0.673
  StudentizedResiduals wide;
  wide.z = 2.0 * z.z;
  const NormalityReport inflated = normality_report(wide);
  const double expected = 2.0 * normal_cdf(0.98) - 1.0;
  CHECK(std::abs(inflated.coverage(0) - expected) < 0.02);
  CHECK(std::abs(inflated.coverage(1) - expected) < 0.02);

  StudentizedResiduals tiny;
  tiny.z = Matrix::Zero(50, 2);
  CHECK_THROWS_AS(normality_report(tiny), argument_error);
}

TEST_CASE("incomplete gamma and chi-squared CDF against frozen references") {
  // gamma_p(1, 1) = 1 - exp(-1); gamma_p(0.5, 0.5) = erf(sqrt(0.5))
  CHECK(gamma_p(1.0, 1.0) == doctest::Approx(0.6321205588285577).epsilon(1e-12));
  CHECK(gamma_p(0.5, 0.5) == doctest::Approx(0.6826894921370859).epsilon(1e-12));
  // chi^2_2 has the closed form 1 - exp(-x/2)
  for (double x : {0.5, 1.0, 3.0, 8.0})
    CHECK(chi_squared_cdf(x, 2) == doctest::Approx(1.0 - std::exp(-x / 2)).epsilon(1e-12));
}

TEST_CASE("finite-sample normality of the studentized residuals (small run)") {
  // moderate size keeps this in unit-test budget; the acceptance suite runs
  // the full-size configuration
  const LatentModel model = testmodels::three_group_model(150, 3);
  const int M = 10;
  const GroundTruth truth = make_ground_truth(model, M, 2);
  Matrix pooled(0, 2);
  for (std::uint64_t seed : {1, 2, 3}) {
    const UnfoldedIntensity lam = sample_binned(model, seed, M, 2);
    const Embedding e = duase(lam, 2);
    const AlignmentReport alignment = recovery_error(e, truth, AlignMode::appendix_w);
    const StudentizedResiduals z = studentize(e, truth, alignment, Side::left_x);
    const Eigen::Index at = pooled.rows();
    pooled.conservativeResize(at + z.z.rows(), 2);
    pooled.middleRows(at, z.z.rows()) = z.z;
  }
  StudentizedResiduals all;
  all.z = pooled;
  const NormalityReport report = normality_report(all);
  CHECK(report.coverage(0) > 0.90);
  CHECK(report.coverage(0) < 0.99);
  CHECK(report.coverage(1) > 0.90);
  CHECK(report.coverage(1) < 0.99);
  CHECK(report.max_abs_deviation < 0.2);
}
