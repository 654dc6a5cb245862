#pragma once

#include <optional>

#include "mplex/embed.hpp"

namespace mplex {

// max_i ||A_{i,.}||_2
double two_to_infinity_norm(const Matrix& A);

// argmin_{Q orthogonal} ||A Q - B||_F via the SVD of A^T B. A rank-deficient
// cross product still yields a valid Q; *degenerate reports it.
Matrix orthogonal_procrustes(const Matrix& A, const Matrix& B, bool* degenerate = nullptr);

// Orthogonal W minimizing ||Ubar^T Uhat - W||_F^2 + ||Vbar^T Vhat - W||_F^2
// (polar factor of the sum). Inputs must have orthonormal columns (1e-6).
Matrix alignment_W(const Matrix& U_bar, const Matrix& U_hat, const Matrix& V_bar,
                   const Matrix& V_hat);

struct KlrTransforms {
  Matrix K;  // Xbar = Xtilde K
  Matrix R;  // Ybar = Y R, and K R^T = I_d
};

// Least-squares transforms relating the exact-mean SVD factors to the true
// positions. Requires full column rank and an exactly factorizable input
// (residuals are verified).
KlrTransforms klr_transforms(const BinnedPositions& x_tilde, const Matrix& Y,
                             const SvdResult& mean_svd);

// Everything recovery diagnostics need about the generating model at a given
// bin count: exact mean, its SVD, bin-averaged positions and the K/R pair.
struct GroundTruth {
  const LatentModel* model = nullptr;
  UnfoldedIntensity lambda_bar;
  BinnedPositions x_tilde;
  SvdResult mean_svd;
  KlrTransforms klr;
};

GroundTruth make_ground_truth(const LatentModel& model, int n_bins, int rank);

enum class AlignMode { procrustes_global, procrustes_per_bin, appendix_w };

struct AlignmentReport {
  AlignMode mode = AlignMode::appendix_w;
  Matrix W;          // orthogonal factor (appendix mode), else identity
  Matrix W_X, W_Y;   // applied transforms: estimate * W_X compares to truth
  std::vector<Matrix> per_bin_Q;  // procrustes_per_bin only
  // max-row-norm errors
  double err_x = 0.0;             // ||Xhat W_X - Xtilde||_{2,inf}
  double err_y = 0.0;             // ||Yhat W_Y - Y||_{2,inf}
  double err_x_continuous = 0.0;  // max_m sup_t ||Xhat^(m) W_X - X(t)||_{2,inf}
  double err_x_bias = 0.0;        // max_m sup_t ||Xtilde^(m) - X(t)||_{2,inf}
  int sup_grid = 10;
  bool procrustes_degenerate = false;
};

// Theorem-style recovery errors. The sup over t is approximated on a
// per-bin grid of `sup_grid` points spanning each (left-open) bin.
AlignmentReport recovery_error(const Embedding& embedding, const GroundTruth& truth,
                               AlignMode mode, int sup_grid = 10);

struct AssumptionDiagnostics {
  Matrix moment_x;  // Xtilde^T Xtilde / (N M)
  Matrix moment_y;  // Y^T Y / (N L)
  double kappa_x = 0.0, kappa_y = 0.0;
  double mu_x = 0.0, mu_y = 0.0;
  double lipschitz_x = 0.0;         // K_N
  double lipschitz_subspace = 0.0;  // K_{N,1}
  double lipschitz_coord = 0.0;     // K_{N,2}
  int grid = 0;
  bool projector_degenerate = false;
};

// Moment/conditioning/incoherence summaries plus difference-quotient
// Lipschitz estimates over adjacent points of a uniform grid on [0,1].
AssumptionDiagnostics assumption_diagnostics(const BinnedPositions& x_tilde,
                                             const Matrix& Y, const LatentModel& model,
                                             int grid);

// Orthogonal projector onto the column space of X(t).
Matrix trajectory_projector(const LatentModel& model, double t);

struct LipschitzLadder {
  std::vector<int> grids;
  std::vector<double> estimates;  // K_N per grid
  double growth = 0.0;            // last / first
  bool violation = false;         // growth >= 10 across the ladder
};

// Refinement study: K_N on grids base, base*factor, base*factor^2, ...
// A Lipschitz trajectory stabilizes; a jump makes the estimate grow
// linearly with the grid, which the growth threshold flags.
LipschitzLadder lipschitz_refinement(const LatentModel& model, int base_grid,
                                     int steps = 2, int factor = 4);

// Log-log least squares of y against x; slope and R^2.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
RateFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mplex
