#pragma once

#include "mplex/align.hpp"

namespace mplex {

// Row-residual covariance shapes from the studentized CLT. Both are
// symmetric positive definite whenever the rank-preservation condition
// holds; a singular result raises numerical_error.
//   C_{i,m} = (1/NL) sum_j (Xtilde^(m)_{i,.} Y_{j,.}^T) Y_{j,.}^T Y_{j,.}
//   D_{i,l} = (1/NM) sum_j (Xtilde_{j,.} Y^(l)_{i,.}^T) Xtilde_{j,.}^T Xtilde_{j,.}
Matrix covariance_C(const BinnedPositions& x_tilde, const Matrix& Y, int i, int m);
Matrix covariance_D(const BinnedPositions& x_tilde, const Matrix& Y, int i, int l);

enum class Side { left_x, right_y };

struct StudentizedResiduals {
  Matrix z;                       // one d-vector per row
  Side side = Side::left_x;
  std::vector<Matrix> scalings;   // applied inverse-square-root matrix per row
  int n_nodes = 0;
  int n_bins = 0;
  int n_layers = 0;
};

// Studentization of the aligned residual rows. The scaling follows the
// CLT derivation for the histogram estimator (entries are M x Poisson
// counts):
//   side X, row (i,m): z = sqrt(NL/M) (Qy^-1 C_{i,m} Qy^-1)^{-1/2} r_{i,m}
//   side Y, row (l,i): z = sqrt(N)    (Qx^-1 D_{i,l} Qx^-1)^{-1/2} r_{l,i}
// with Qx = Xtilde^T Xtilde/(NM), Qy = Y^T Y/(NL) as finite-N plug-ins.
// Requires an appendix-W alignment.
StudentizedResiduals studentize(const Embedding& embedding, const GroundTruth& truth,
                                const AlignmentReport& alignment, Side side);

struct NormalityReport {
  Vector coverage;                // per-coordinate share inside [-1.96, 1.96]
  Matrix pooled_covariance;
  double max_abs_deviation = 0.0; // ||pooled_cov - I||_max
  double chi_squared_ks = 0.0;    // KS distance of ||z||^2 against chi^2_d
  bool degenerate = false;        // all-zero residuals
  long n_rows = 0;
};

// Requires at least 100 residual rows.
NormalityReport normality_report(const StudentizedResiduals& residuals);

// Symmetric PSD inverse square root; eigenvalues below the floor are a hard
// error (invertibility is an assumption, not something to clamp).
Matrix inverse_sqrt_spd(const Matrix& S, double floor = 1e-12);

}  // namespace mplex
