#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "tonelex/errors.hpp"

namespace tonelex::splines {

// ---------------------------------------------------------------------------
// Basis and penalties
// ---------------------------------------------------------------------------

/// Cubic (by default) B-spline basis of k functions on [lo, hi] with an
/// open-uniform knot vector: degree+1 repeats at each boundary, k-degree-1
/// equally spaced interior knots.
struct BasisSpec {
  int k = 4;
  int degree = 3;
  double lo = 0.0;
  double hi = 1.0;

  std::vector<double> knots() const;
};

/// Design matrix (|x| rows, k columns): row i holds the k basis values at
/// x[i], computed with the Cox-de Boor recurrence. Values within 1e-12 of a
/// domain boundary are clamped; anything further out throws OutOfDomain.
Eigen::MatrixXd bspline_design(const BasisSpec& spec, std::span<const double> x);

/// Single-point convenience wrapper around bspline_design.
Eigen::RowVectorXd bspline_row(const BasisSpec& spec, double x);

/// D'D for the order-th difference operator D on a length-k coefficient
/// sequence (the standard P-spline roughness penalty). order must be < k.
Eigen::MatrixXd difference_penalty(int k, int order);

/// Orthonormal basis Z (k x k-1) of the null space of column_sums', used to
/// absorb a sum-to-zero identifiability constraint: replacing a basis B by
/// B*Z removes the constant function from its span (so a smooth cannot
/// compete with the model intercept), and a penalty P transforms to Z'PZ.
Eigen::MatrixXd sum_to_zero_null_basis(const Eigen::VectorXd& column_sums);

// ---------------------------------------------------------------------------
// Penalized least squares
// ---------------------------------------------------------------------------

/// Quadratic penalty acting on the coefficient range
/// [offset, offset+matrix.rows()). Blocks sharing a lambda_index share one
/// smoothing parameter; -1 means "use this block's position in the list".
struct PenaltyBlock {
  Eigen::Index offset = 0;
  Eigen::MatrixXd matrix;
  int lambda_index = -1;
};

struct PenalizedFit {
  Eigen::VectorXd coefficients;
  std::vector<double> lambdas;
  double edf = 0.0;    // trace of the influence matrix
  double rss = 0.0;    // weighted residual sum of squares
  Eigen::Index n_obs = 0;
  Eigen::VectorXd leverage;  // per-coefficient diagonal of (X'WX+P)^-1 X'WX
};

/// Precomputed normal-equation state for one design; solving for a new
/// lambda vector costs one factorization, no data pass. This is what makes
/// grid search over smoothing parameters affordable.
class PenalizedSystem {
 public:
  PenalizedSystem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  std::vector<PenaltyBlock> penalties,
                  const Eigen::VectorXd* weights = nullptr);

  int lambda_count() const { return n_lambda_; }
  Eigen::Index n_obs() const { return n_; }
  Eigen::Index n_coef() const { return p_; }
  /// Mean weighted square of the response; used as the scale floor when
  /// comparing GCV scores of degenerate (near-perfect) fits.
  double response_scale() const;

  /// Minimizes ||W^1/2 (y - X b)||^2 + sum_j lambda_j b' P_j b. Throws
  /// SingularSystem if the penalized normal matrix is rank-deficient beyond
  /// a 1e-10 relative tolerance.
  PenalizedFit solve(std::span<const double> lambdas) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd weights_;  // empty when unweighted
  Eigen::MatrixXd xtwx_;
  Eigen::VectorXd xtwy_;
  double ytwy_ = 0.0;
  Eigen::Index n_ = 0, p_ = 0;
  std::vector<PenaltyBlock> penalties_;
  int n_lambda_ = 0;
};

/// One-shot penalized least squares; see PenalizedSystem::solve.
PenalizedFit penalized_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          std::vector<PenaltyBlock> penalties,
                          std::span<const double> lambdas,
                          const Eigen::VectorXd* weights = nullptr);

// ---------------------------------------------------------------------------
// Smoothing-parameter selection and model score
// ---------------------------------------------------------------------------

/// GCV(lambda) = n * RSS / (n - edf)^2; +inf when edf >= n.
double gcv_score(const PenalizedFit& fit);

struct GcvResult {
  std::vector<double> lambda;   // selected grid point
  PenalizedFit fit;
  std::vector<double> scores;   // GCV per grid point, grid order
  std::size_t selected_index = 0;
};

/// Evaluates every lambda vector in the grid and returns the GCV minimizer.
/// Near-ties (relative 1e-9, plus an absolute floor tied to the response
/// scale so that degenerate perfect fits compare as equal) are broken toward
/// the lexicographically larger lambda.
GcvResult gcv_select(const PenalizedSystem& system,
                     const std::vector<std::vector<double>>& lambda_grid);

GcvResult gcv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<PenaltyBlock> penalties,
                     const std::vector<std::vector<double>>& lambda_grid,
                     const Eigen::VectorXd* weights = nullptr);

/// 13-point log-spaced ladder 1e-4 .. 1e8.
std::vector<double> default_lambda_grid();

/// Gaussian AIC with profiled variance: n log(RSS/n) + 2 (edf + 1).
/// Throws DegenerateFit when RSS is exactly zero.
double aic(const PenalizedFit& fit);

// ---------------------------------------------------------------------------
// AR(1) whitening
// ---------------------------------------------------------------------------

/// Whitens a time-ordered series against AR(1) correlation rho:
/// out_1 = y_1 sqrt(1-rho^2), out_t = y_t - rho y_{t-1}. Apply the same
/// transform to each design column (ar1_whiten_rows_inplace) for GLS.
/// Requires 0 <= rho < 1.
Eigen::VectorXd ar1_whiten(const Eigen::VectorXd& y_ordered, double rho);
void ar1_whiten_inplace(Eigen::Ref<Eigen::VectorXd> y, double rho);
void ar1_whiten_rows_inplace(Eigen::Ref<Eigen::MatrixXd> X, double rho);

}  // namespace tonelex::splines
