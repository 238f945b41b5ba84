#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tonelex/splines.hpp"

using namespace tonelex;
using namespace tonelex::splines;

namespace {

Eigen::MatrixXd random_design(std::mt19937_64& rng, int n, int p) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = g(rng);
  return x;
}

oracle::Matrix to_oracle(const Eigen::MatrixXd& m) {
  oracle::Matrix out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

}  // namespace

TEST_CASE("bspline rows sum to one and interpolate the left boundary") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k : {4, 6, 10}) {
    BasisSpec spec{k, 3, 0.0, 1.0};
    std::vector<double> xs = {0.0, 1.0};
    for (int i = 0; i < 50; ++i) xs.push_back(u(rng));
    Eigen::MatrixXd b = bspline_design(spec, xs);
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      CHECK(std::abs(b.row(i).sum() - 1.0) < 1e-12);
    CHECK(b(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = 1; j < k; ++j) CHECK(std::abs(b(0, j)) < 1e-14);
    CHECK(b(1, k - 1) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("bspline_design matches the textbook Cox-de Boor recursion") {
  BasisSpec spec{4, 3, 0.0, 1.0};
  Eigen::RowVectorXd row = bspline_row(spec, 0.5);
  std::vector<double> expect = oracle::bspline_row(4, 3, 0.0, 1.0, 0.5);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(row(j) - expect[j]) < 1e-12);

  // wider sweep over bases, degrees and random points
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  for (int k : {4, 5, 8, 12}) {
    for (int degree : {2, 3}) {
      if (k < degree + 1) continue;
      BasisSpec s{k, degree, -2.0, 3.0};
      for (int i = 0; i < 60; ++i) {
        double x = u(rng);
        Eigen::RowVectorXd got = bspline_row(s, x);
        std::vector<double> want = oracle::bspline_row(k, degree, -2.0, 3.0, x);
        for (int j = 0; j < k; ++j) CHECK(std::abs(got(j) - want[j]) < 1e-12);
      }
    }
  }
}

TEST_CASE("bspline_design clamps near-boundary values and rejects the rest") {
  BasisSpec spec{5, 3, 0.0, 1.0};
  CHECK_NOTHROW(bspline_row(spec, -5e-13));
  CHECK_NOTHROW(bspline_row(spec, 1.0 + 5e-13));
  CHECK_THROWS_AS(bspline_row(spec, -1e-6), Error);
  CHECK_THROWS_AS(bspline_row(spec, 1.1), Error);
}

TEST_CASE("difference penalties match hand-computed matrices") {
  Eigen::MatrixXd p31 = difference_penalty(3, 1);
  Eigen::MatrixXd want31(3, 3);
  want31 << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((p31 - want31).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd p21 = difference_penalty(2, 1);
  Eigen::MatrixXd want21(2, 2);
  want21 << 1, -1, -1, 1;
  CHECK((p21 - want21).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("difference penalty annihilates low-degree coefficient sequences") {
  for (int k : {5, 9}) {
    for (int order : {1, 2}) {
      Eigen::MatrixXd p = difference_penalty(k, order);
      for (int deg = 0; deg < order; ++deg) {
        Eigen::VectorXd beta(k);
        for (int i = 0; i < k; ++i) beta(i) = std::pow(i + 1.0, deg);
        CHECK(std::abs(beta.dot(p * beta)) < 1e-10);
      }
      // one degree higher is NOT annihilated
      Eigen::VectorXd beta(k);
      for (int i = 0; i < k; ++i) beta(i) = std::pow(i + 1.0, order);
      CHECK(beta.dot(p * beta) > 1e-6);
    }
  }
}

TEST_CASE("penalized_ls at lambda=0 equals ordinary least squares") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x = random_design(rng, 40, 5);
  Eigen::VectorXd y = random_design(rng, 40, 1);
  std::vector<double> lambdas = {0.0};
  PenalizedFit fit = penalized_ls(x, y, {{0, difference_penalty(5, 2), 0}}, lambdas);

  std::vector<double> beta_oracle = oracle::penalized_normal_solve(
      to_oracle(x), std::vector<double>(y.data(), y.data() + y.size()), {});
  for (int j = 0; j < 5; ++j)
    CHECK(std::abs(fit.coefficients(j) - beta_oracle[j]) < 1e-8);
  CHECK(fit.edf == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("penalized_ls matches the elimination oracle on a 5x3 system") {
  // the small fixed system from the operation examples
  Eigen::MatrixXd x(5, 3);
  x << 1, 0.1, 0.2, 1, 0.4, 0.1, 1, 0.9, 0.7, 1, 1.3, 1.1, 1, 1.8, 1.9;
  Eigen::VectorXd y(5);
  y << 0.3, 0.5, 1.1, 1.6, 2.4;
  Eigen::MatrixXd p = difference_penalty(3, 1);
  std::vector<double> lambdas = {0.5};
  PenalizedFit fit = penalized_ls(x, y, {{0, p, 0}}, lambdas);

  std::vector<double> beta = oracle::penalized_normal_solve(
      to_oracle(x), {0.3, 0.5, 1.1, 1.6, 2.4}, {{0, to_oracle(p), 0.5}});
  for (int j = 0; j < 3; ++j) CHECK(std::abs(fit.coefficients(j) - beta[j]) < 1e-8);
}

TEST_CASE("huge lambda with an order-2 penalty drives the fit affine") {
  // k = degree+1: Greville abscissae are equally spaced, so the plain
  // second-difference null space is exactly the affine functions.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.1);
  const int n = 120;
  std::vector<double> xs(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = u(rng);
    y(i) = std::sin(2.0 * std::numbers::pi * xs[i]) + g(rng);
  }
  BasisSpec spec{4, 3, 0.0, 1.0};
  Eigen::MatrixXd x = bspline_design(spec, xs);
  std::vector<double> lambdas = {1e12};
  PenalizedFit fit = penalized_ls(x, y, {{0, difference_penalty(4, 2), 0}}, lambdas);
  Eigen::VectorXd fitted = x * fit.coefficients;

  // least-squares line through (xs, fitted)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += fitted(i);
    sxx += xs[i] * xs[i];
    sxy += xs[i] * fitted(i);
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icpt = (sy - slope * sx) / n;
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(fitted(i) - (icpt + slope * xs[i])) < 1e-6);
  CHECK(fit.edf == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("rank-deficient unpenalized systems raise SingularSystem") {
  std::mt19937_64 rng(9);
  Eigen::MatrixXd x = random_design(rng, 20, 4);
  x.col(3) = x.col(1);  // duplicated column
  Eigen::VectorXd y = random_design(rng, 20, 1);
  std::vector<double> lambdas;
  CHECK_THROWS_AS(penalized_ls(x, y, {}, lambdas), Error);
  try {
    penalized_ls(x, y, {}, lambdas);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::singular_system);
  }
}

TEST_CASE("edf equals rank at lambda=0 and never increases with lambda") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 80;
  std::vector<double> xs(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = u(rng);
    y(i) = std::cos(3.0 * xs[i]);
  }
  BasisSpec spec{8, 3, 0.0, 1.0};
  Eigen::MatrixXd x = bspline_design(spec, xs);
  PenalizedSystem system(x, y, {{0, difference_penalty(8, 2), 0}});

  double zero = 0.0;
  CHECK(system.solve(std::span(&zero, 1)).edf == doctest::Approx(8.0).epsilon(1e-6));

  double prev = 9.0;
  for (double l : default_lambda_grid()) {
    PenalizedFit fit = system.solve(std::span(&l, 1));
    CHECK(fit.edf <= prev + 1e-9);
    CHECK(fit.edf >= 0.0);
    CHECK(fit.edf <= 8.0 + 1e-9);
    prev = fit.edf;
  }
}

TEST_CASE("fitted values are invariant to affine covariate reparameterization") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.05);
  const int n = 60;
  std::vector<double> xs(n), zs(n);
  Eigen::VectorXd y(n);
  const double shift = 3.0, scale = 40.0;
  for (int i = 0; i < n; ++i) {
    xs[i] = u(rng);
    zs[i] = shift + scale * xs[i];
    y(i) = std::sin(5.0 * xs[i]) + g(rng);
  }
  BasisSpec sa{9, 3, 0.0, 1.0};
  BasisSpec sb{9, 3, shift, shift + scale};
  std::vector<double> lambdas = {2.5};
  PenalizedFit fa =
      penalized_ls(bspline_design(sa, xs), y, {{0, difference_penalty(9, 2), 0}}, lambdas);
  PenalizedFit fb =
      penalized_ls(bspline_design(sb, zs), y, {{0, difference_penalty(9, 2), 0}}, lambdas);
  Eigen::VectorXd ya = bspline_design(sa, xs) * fa.coefficients;
  Eigen::VectorXd yb = bspline_design(sb, zs) * fb.coefficients;
  CHECK((ya - yb).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("whitening X and y then OLS equals OLS on the whitened system") {
  std::mt19937_64 rng(29);
  Eigen::MatrixXd x = random_design(rng, 50, 4);
  Eigen::VectorXd y = random_design(rng, 50, 1);
  const double rho = 0.8;

  Eigen::MatrixXd xw = x;
  Eigen::VectorXd yw = y;
  ar1_whiten_rows_inplace(xw, rho);
  ar1_whiten_inplace(yw, rho);

  std::vector<double> none;
  PenalizedFit fit = penalized_ls(xw, yw, {}, none);
  std::vector<double> beta = oracle::penalized_normal_solve(
      to_oracle(xw), std::vector<double>(yw.data(), yw.data() + yw.size()), {});
  for (int j = 0; j < 4; ++j) CHECK(std::abs(fit.coefficients(j) - beta[j]) < 1e-8);
}

TEST_CASE("gcv returns the largest lambda when the response is constant") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 40;
  std::vector<double> xs(n);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 5.0);
  for (int i = 0; i < n; ++i) xs[i] = u(rng);
  BasisSpec spec{6, 3, 0.0, 1.0};
  Eigen::MatrixXd x = bspline_design(spec, xs);

  std::vector<std::vector<double>> grid;
  for (double l : default_lambda_grid()) grid.push_back({l});
  GcvResult r = gcv_select(x, y, {{0, difference_penalty(6, 1), 0}}, grid);
  CHECK(r.lambda[0] == doctest::Approx(1e8));
  CHECK(r.fit.rss < 1e-12);
}

TEST_CASE("gcv selection satisfies the argmin property over its grid") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.3);
  const int n = 150;
  std::vector<double> xs(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = u(rng);
    y(i) = std::sin(2.0 * std::numbers::pi * xs[i]) + g(rng);
  }
  BasisSpec spec{12, 3, 0.0, 1.0};
  Eigen::MatrixXd x = bspline_design(spec, xs);
  std::vector<std::vector<double>> grid;
  for (double l : default_lambda_grid()) grid.push_back({l});
  GcvResult r = gcv_select(x, y, {{0, difference_penalty(12, 2), 0}}, grid);
  const double tol = 1e-9 * r.scores[r.selected_index] + 1e-12;
  for (double s : r.scores) CHECK(r.scores[r.selected_index] <= s + tol);
}

TEST_CASE("gcv beats both grid endpoints on a noisy sine") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.25);
  const int n = 200;
  std::vector<double> xs(n);
  Eigen::VectorXd y(n), truth(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = u(rng);
    truth(i) = std::sin(2.0 * std::numbers::pi * xs[i]);
    y(i) = truth(i) + g(rng);
  }
  BasisSpec spec{12, 3, 0.0, 1.0};
  Eigen::MatrixXd x = bspline_design(spec, xs);
  std::vector<std::vector<double>> grid;
  for (int e = -4; e <= 4; ++e) grid.push_back({std::pow(10.0, e)});

  PenalizedSystem system(x, y, {{0, difference_penalty(12, 2), 0}});
  GcvResult r = gcv_select(system, grid);

  auto rmse_at = [&](const std::vector<double>& l) {
    PenalizedFit f = system.solve(l);
    return std::sqrt((x * f.coefficients - truth).squaredNorm() / n);
  };
  double selected = rmse_at(r.lambda);
  CHECK(selected <= rmse_at(grid.front()) + 1e-12);
  CHECK(selected <= rmse_at(grid.back()) + 1e-12);
}

TEST_CASE("aic plug-in arithmetic and the degenerate case") {
  PenalizedFit fit;
  fit.n_obs = 100;
  fit.rss = 100.0;
  fit.edf = 5.0;
  CHECK(aic(fit) == doctest::Approx(12.0).epsilon(1e-12));
  fit.rss = 0.0;
  CHECK_THROWS_AS(aic(fit), Error);
}

TEST_CASE("a useless smooth changes AIC by less than twice its edf cost") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.2);
  const int n = 300;
  std::vector<double> xs(n), zs(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = u(rng);
    zs[i] = u(rng);  // irrelevant covariate
    y(i) = 0.8 * xs[i] + g(rng);
  }
  BasisSpec spec{6, 3, 0.0, 1.0};
  Eigen::MatrixXd bx = bspline_design(spec, xs);
  Eigen::MatrixXd bz = bspline_design(spec, zs);

  // model without the useless smooth
  std::vector<std::vector<double>> grid1;
  for (double l : default_lambda_grid()) grid1.push_back({l});
  GcvResult small = gcv_select(bx, y, {{0, difference_penalty(6, 2), 0}}, grid1);

  // model with it: the z-block enters under a sum-to-zero constraint so the
  // constant direction stays unique to the x-block
  Eigen::MatrixXd z = sum_to_zero_null_basis(bz.colwise().sum());
  Eigen::MatrixXd bzc = bz * z;
  Eigen::MatrixXd pz = z.transpose() * difference_penalty(6, 2) * z;
  Eigen::MatrixXd x2(n, bx.cols() + bzc.cols());
  x2 << bx, bzc;
  std::vector<std::vector<double>> grid2;
  for (double l1 : default_lambda_grid())
    for (double l2 : default_lambda_grid()) grid2.push_back({l1, l2});
  GcvResult big =
      gcv_select(x2, y, {{0, difference_penalty(6, 2), 0}, {6, pz, 1}}, grid2);

  const double delta_aic = aic(big.fit) - aic(small.fit);
  const double delta_edf = big.fit.edf - small.fit.edf;
  CHECK(std::abs(delta_aic) < 2.0 * std::abs(delta_edf) + 4.0);
}

TEST_CASE("ar1 whitening identities and validation") {
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 3.0, 4.0;
  Eigen::VectorXd w0 = ar1_whiten(y, 0.0);
  CHECK((w0 - y).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(ar1_whiten(y, 1.0), Error);
  CHECK_THROWS_AS(ar1_whiten(y, -0.1), Error);

  Eigen::VectorXd w = ar1_whiten(y, 0.5);
  CHECK(w(0) == doctest::Approx(1.0 * std::sqrt(0.75)).epsilon(1e-15));
  CHECK(w(1) == doctest::Approx(2.0 - 0.5 * 1.0).epsilon(1e-15));
  CHECK(w(3) == doctest::Approx(4.0 - 0.5 * 3.0).epsilon(1e-15));
}

TEST_CASE("whitening removes nearly all lag-1 autocorrelation at rho=0.95") {
  std::mt19937_64 rng(4711);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 5000;
  const double rho = 0.95;
  Eigen::VectorXd y(n);
  y(0) = g(rng) / std::sqrt(1.0 - rho * rho);
  for (int i = 1; i < n; ++i) y(i) = rho * y(i - 1) + g(rng);

  std::vector<double> raw(y.data(), y.data() + n);
  CHECK(oracle::lag1_autocorrelation(raw) > 0.9);

  Eigen::VectorXd w = ar1_whiten(y, rho);
  std::vector<double> white(w.data(), w.data() + n);
  CHECK(std::abs(oracle::lag1_autocorrelation(white)) < 0.05);
}
