#include "tonelex/splines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

namespace tonelex::splines {

std::vector<double> BasisSpec::knots() const {
  if (k < degree + 1)
    throw Error(Errc::config_error,
                "basis needs k >= degree+1 (k=" + std::to_string(k) +
                    ", degree=" + std::to_string(degree) + ")");
  if (!(hi > lo))
    throw Error(Errc::config_error, "basis domain is empty");
  std::vector<double> t(k + degree + 1);
  const int n_interior = k - degree - 1;
  for (int i = 0; i <= degree; ++i) t[i] = lo;
  for (int i = 1; i <= n_interior; ++i)
    t[degree + i] = lo + (hi - lo) * i / (n_interior + 1);
  for (int i = 0; i <= degree; ++i) t[k + i] = hi;
  return t;
}

namespace {

constexpr double kBoundaryFuzz = 1e-12;

// Values of the degree+1 non-vanishing basis functions at x, plus the index
// of the first one. Standard Cox-de Boor triangular recurrence.
void basis_at(const std::vector<double>& t, int degree, int k, double x,
              int& first, double* values) {
  // Knot span: largest i with t[i] <= x < t[i+1], clamped to valid spans.
  int lo_span = degree;
  int hi_span = k - 1;  // last span [t[k-1], t[k])
  int span = hi_span;
  if (x < t[k]) {
    span = static_cast<int>(
               std::upper_bound(t.begin() + lo_span, t.begin() + hi_span + 1, x) -
               t.begin()) - 1;
    span = std::clamp(span, lo_span, hi_span);
  }

  std::vector<double> left(degree + 1), right(degree + 1);
  values[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double denom = right[r + 1] + left[j - r];
      double term = denom == 0.0 ? 0.0 : values[r] / denom;
      values[r] = saved + right[r + 1] * term;
      saved = left[j - r] * term;
    }
    values[j] = saved;
  }
  first = span - degree;
}

}  // namespace

Eigen::MatrixXd bspline_design(const BasisSpec& spec, std::span<const double> x) {
  const std::vector<double> t = spec.knots();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()),
                                              spec.k);
  std::vector<double> values(spec.degree + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double xi = x[i];
    if (xi < spec.lo) {
      if (spec.lo - xi > kBoundaryFuzz)
        throw Error(Errc::out_of_domain,
                    std::to_string(xi) + " below domain [" +
                        std::to_string(spec.lo) + ", " + std::to_string(spec.hi) + "]");
      xi = spec.lo;
    } else if (xi > spec.hi) {
      if (xi - spec.hi > kBoundaryFuzz)
        throw Error(Errc::out_of_domain,
                    std::to_string(xi) + " above domain [" +
                        std::to_string(spec.lo) + ", " + std::to_string(spec.hi) + "]");
      xi = spec.hi;
    }
    int first = 0;
    basis_at(t, spec.degree, spec.k, xi, first, values.data());
    for (int j = 0; j <= spec.degree; ++j) {
      int col = first + j;
      if (col >= 0 && col < spec.k) out(static_cast<Eigen::Index>(i), col) = values[j];
    }
  }
  return out;
}

Eigen::RowVectorXd bspline_row(const BasisSpec& spec, double x) {
  return bspline_design(spec, std::span<const double>(&x, 1)).row(0);
}

Eigen::MatrixXd difference_penalty(int k, int order) {
  if (order < 1 || order >= k)
    throw Error(Errc::config_error,
                "difference order must satisfy 1 <= order < k");
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(k, k);
  for (int m = 0; m < order; ++m) {
    Eigen::Index rows = d.rows() - 1;
    d = (d.bottomRows(rows) - d.topRows(rows)).eval();
  }
  return d.transpose() * d;
}

Eigen::MatrixXd sum_to_zero_null_basis(const Eigen::VectorXd& column_sums) {
  const Eigen::Index k = column_sums.size();
  if (k < 2)
    throw Error(Errc::config_error, "constraint needs at least 2 columns");
  if (column_sums.cwiseAbs().maxCoeff() == 0.0)
    throw Error(Errc::config_error, "constraint vector is zero");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(column_sums);
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(k - 1);
}

// ---------------------------------------------------------------------------
// PenalizedSystem
// ---------------------------------------------------------------------------

namespace {

int count_lambda_groups(std::vector<PenaltyBlock>& penalties, Eigen::Index p) {
  int next = 0;
  for (std::size_t j = 0; j < penalties.size(); ++j) {
    PenaltyBlock& b = penalties[j];
    if (b.matrix.rows() != b.matrix.cols())
      throw Error(Errc::shape_mismatch, "penalty block matrix is not square");
    if (b.offset < 0 || b.offset + b.matrix.rows() > p)
      throw Error(Errc::shape_mismatch, "penalty block exceeds coefficient range");
    if (b.lambda_index < 0) b.lambda_index = static_cast<int>(j);
    next = std::max(next, b.lambda_index + 1);
  }
  return next;
}

}  // namespace

PenalizedSystem::PenalizedSystem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 std::vector<PenaltyBlock> penalties,
                                 const Eigen::VectorXd* weights)
    : x_(X), y_(y), n_(X.rows()), p_(X.cols()), penalties_(std::move(penalties)) {
  if (X.rows() != y.size())
    throw Error(Errc::shape_mismatch, "design rows != response length");
  if (weights && weights->size() != y.size())
    throw Error(Errc::shape_mismatch, "weight vector length != response length");
  n_lambda_ = count_lambda_groups(penalties_, p_);

  if (weights) {
    Eigen::ArrayXd w = weights->array();
    if ((w < 0.0).any())
      throw Error(Errc::config_error, "weights must be non-negative");
    weights_ = *weights;
    Eigen::MatrixXd wx = w.matrix().asDiagonal() * X;
    xtwx_ = X.transpose() * wx;
    xtwy_ = X.transpose() * (w * y.array()).matrix();
    ytwy_ = (w * y.array().square()).sum();
  } else {
    xtwx_ = X.transpose() * X;
    xtwy_ = X.transpose() * y;
    ytwy_ = y.squaredNorm();
  }
}

double PenalizedSystem::response_scale() const {
  return n_ > 0 ? ytwy_ / static_cast<double>(n_) : 0.0;
}

PenalizedFit PenalizedSystem::solve(std::span<const double> lambdas) const {
  if (static_cast<int>(lambdas.size()) != n_lambda_)
    throw Error(Errc::shape_mismatch,
                "expected " + std::to_string(n_lambda_) + " lambdas, got " +
                    std::to_string(lambdas.size()));
  for (double l : lambdas)
    if (!(l >= 0.0)) throw Error(Errc::config_error, "lambda must be >= 0");

  Eigen::MatrixXd a = xtwx_;
  for (const PenaltyBlock& b : penalties_) {
    a.block(b.offset, b.offset, b.matrix.rows(), b.matrix.cols()) +=
        lambdas[b.lambda_index] * b.matrix;
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success)
    throw Error(Errc::singular_system, "LDLT factorization failed");
  // Rank deficiency is possible only when some lambda is zero (or nothing is
  // penalized); there the 1e-10 tolerance applies. With every lambda > 0 the
  // matrix is positive definite by construction and only exact (machine-eps)
  // singularity is an error -- large lambdas make the system ill-conditioned
  // but solvable, and must not be rejected.
  bool has_zero_lambda = penalties_.empty();
  for (double l : lambdas) has_zero_lambda = has_zero_lambda || l == 0.0;
  const double rank_tol = has_zero_lambda ? 1e-10 : 1e-14;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0.0) || d.cwiseAbs().minCoeff() < rank_tol * dmax)
    throw Error(Errc::singular_system,
                "penalized normal matrix rank-deficient beyond tolerance");

  PenalizedFit fit;
  fit.n_obs = n_;
  fit.lambdas.assign(lambdas.begin(), lambdas.end());
  fit.coefficients = ldlt.solve(xtwy_);
  // Iterative refinement: at very large lambdas the system is ill-conditioned
  // and one factorized solve leaves visible error in the penalized directions.
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd residual = xtwy_ - a * fit.coefficients;
    fit.coefficients += ldlt.solve(residual);
  }

  // Residuals computed directly: the quadratic-form expression
  // y'Wy - 2b'X'Wy + b'X'WXb cancels catastrophically near perfect fits.
  Eigen::VectorXd residual = y_ - x_ * fit.coefficients;
  fit.rss = weights_.size() > 0
                ? (weights_.array() * residual.array().square()).sum()
                : residual.squaredNorm();

  // Influence diagonal: H = (X'WX + P)^-1 X'WX, edf = tr(H).
  Eigen::MatrixXd h = ldlt.solve(xtwx_);
  fit.leverage = h.diagonal();
  fit.edf = fit.leverage.sum();
  return fit;
}

PenalizedFit penalized_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          std::vector<PenaltyBlock> penalties,
                          std::span<const double> lambdas,
                          const Eigen::VectorXd* weights) {
  return PenalizedSystem(X, y, std::move(penalties), weights).solve(lambdas);
}

// ---------------------------------------------------------------------------
// GCV
// ---------------------------------------------------------------------------

double gcv_score(const PenalizedFit& fit) {
  const double n = static_cast<double>(fit.n_obs);
  const double denom = n - fit.edf;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return n * fit.rss / (denom * denom);
}

namespace {

bool lexicographically_larger(const std::vector<double>& a,
                              const std::vector<double>& b) {
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

GcvResult gcv_select(const PenalizedSystem& system,
                     const std::vector<std::vector<double>>& lambda_grid) {
  if (lambda_grid.empty())
    throw Error(Errc::config_error, "lambda grid is empty");

  // Absorbs float noise between degenerate (zero-residual) fits without
  // swallowing genuinely small GCV differences.
  const double floor = 1e-18 * (system.response_scale() + 1.0);
  GcvResult result;
  result.scores.reserve(lambda_grid.size());

  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    PenalizedFit fit = system.solve(lambda_grid[i]);
    double score = gcv_score(fit);
    result.scores.push_back(score);
    if (i == 0) {
      result.lambda = lambda_grid[i];
      result.fit = std::move(fit);
      result.selected_index = 0;
      continue;
    }
    const double best = result.scores[result.selected_index];
    const double eps = 1e-9 * std::max(std::abs(score), std::abs(best)) + floor;
    const bool better = score < best - eps;
    const bool tie = !better && score <= best + eps;
    if (better || (tie && lexicographically_larger(lambda_grid[i], result.lambda))) {
      result.lambda = lambda_grid[i];
      result.fit = std::move(fit);
      result.selected_index = i;
    }
  }
  return result;
}

GcvResult gcv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<PenaltyBlock> penalties,
                     const std::vector<std::vector<double>>& lambda_grid,
                     const Eigen::VectorXd* weights) {
  PenalizedSystem system(X, y, std::move(penalties), weights);
  return gcv_select(system, lambda_grid);
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int e = -4; e <= 8; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

double aic(const PenalizedFit& fit) {
  if (fit.rss <= 0.0)
    throw Error(Errc::degenerate_fit, "AIC undefined for a zero-residual fit");
  const double n = static_cast<double>(fit.n_obs);
  return n * std::log(fit.rss / n) + 2.0 * (fit.edf + 1.0);
}

// ---------------------------------------------------------------------------
// AR(1) whitening
// ---------------------------------------------------------------------------

namespace {

void check_rho(double rho) {
  if (!(rho >= 0.0) || !(rho < 1.0))
    throw Error(Errc::invalid_rho,
                "rho must lie in [0, 1), got " + std::to_string(rho));
}

}  // namespace

void ar1_whiten_inplace(Eigen::Ref<Eigen::VectorXd> y, double rho) {
  check_rho(rho);
  const Eigen::Index n = y.size();
  if (n == 0) return;
  for (Eigen::Index t = n - 1; t >= 1; --t) y[t] -= rho * y[t - 1];
  y[0] *= std::sqrt(1.0 - rho * rho);
}

Eigen::VectorXd ar1_whiten(const Eigen::VectorXd& y_ordered, double rho) {
  Eigen::VectorXd out = y_ordered;
  ar1_whiten_inplace(out, rho);
  return out;
}

void ar1_whiten_rows_inplace(Eigen::Ref<Eigen::MatrixXd> X, double rho) {
  check_rho(rho);
  const Eigen::Index n = X.rows();
  if (n == 0) return;
  for (Eigen::Index t = n - 1; t >= 1; --t) X.row(t) -= rho * X.row(t - 1);
  X.row(0) *= std::sqrt(1.0 - rho * rho);
}

}  // namespace tonelex::splines
