// Test-only reference implementations, deliberately independent of the
// library code paths they check: naive textbook recursions and plain
// Gaussian elimination, no Eigen, no shared helpers.
#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

// Textbook Cox-de Boor recursion, evaluated top-down for a single basis
// function. The degree-0 indicator is right-closed on the final nonempty
// interval so that the domain endpoint belongs to the last basis function.
inline double bspline_basis(const std::vector<double>& knots, int i, int degree,
                            double x, double domain_hi) {
  if (degree == 0) {
    const bool last = knots[i] < knots[i + 1] && knots[i + 1] == domain_hi;
    if (knots[i] <= x && (x < knots[i + 1] || (last && x == domain_hi)))
      return 1.0;
    return 0.0;
  }
  double left = 0.0, right = 0.0;
  const double d1 = knots[i + degree] - knots[i];
  if (d1 > 0.0)
    left = (x - knots[i]) / d1 * bspline_basis(knots, i, degree - 1, x, domain_hi);
  const double d2 = knots[i + degree + 1] - knots[i + 1];
  if (d2 > 0.0)
    right = (knots[i + degree + 1] - x) / d2 *
            bspline_basis(knots, i + 1, degree - 1, x, domain_hi);
  return left + right;
}

// Open-uniform knot vector for k basis functions of the given degree.
inline std::vector<double> open_uniform_knots(int k, int degree, double lo,
                                              double hi) {
  std::vector<double> t;
  const int interior = k - degree - 1;
  for (int i = 0; i <= degree; ++i) t.push_back(lo);
  for (int i = 1; i <= interior; ++i)
    t.push_back(lo + (hi - lo) * i / (interior + 1));
  for (int i = 0; i <= degree; ++i) t.push_back(hi);
  return t;
}

// All k basis values at x.
inline std::vector<double> bspline_row(int k, int degree, double lo, double hi,
                                       double x) {
  const std::vector<double> t = open_uniform_knots(k, degree, lo, hi);
  std::vector<double> row(k);
  for (int i = 0; i < k; ++i) row[i] = bspline_basis(t, i, degree, x, hi);
  return row;
}

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-300)
      throw std::runtime_error("oracle: singular system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * x[c];
    x[ri] = s / a[ri][ri];
  }
  return x;
}

// beta solving (X'X + sum lambda_j P_j) beta = X'y, built with plain loops.
// Each penalty is (offset, dense matrix) into the coefficient vector.
struct Penalty {
  std::size_t offset;
  Matrix matrix;
  double lambda;
};

inline std::vector<double> penalized_normal_solve(const Matrix& x,
                                                  const std::vector<double>& y,
                                                  const std::vector<Penalty>& penalties) {
  const std::size_t n = x.size();
  const std::size_t p = x.empty() ? 0 : x[0].size();
  Matrix a(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < p; ++r) {
      rhs[r] += x[i][r] * y[i];
      for (std::size_t c = 0; c < p; ++c) a[r][c] += x[i][r] * x[i][c];
    }
  }
  for (const Penalty& pen : penalties)
    for (std::size_t r = 0; r < pen.matrix.size(); ++r)
      for (std::size_t c = 0; c < pen.matrix.size(); ++c)
        a[pen.offset + r][pen.offset + c] += pen.lambda * pen.matrix[r][c];
  return solve_dense(a, rhs);
}

// Lag-1 sample autocorrelation.
inline double lag1_autocorrelation(const std::vector<double>& y) {
  const std::size_t n = y.size();
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    den += (y[i] - mean) * (y[i] - mean);
    if (i + 1 < n) num += (y[i] - mean) * (y[i + 1] - mean);
  }
  return num / den;
}

// Index of the Euclidean-nearest row of `gold`, smallest index on ties.
inline std::size_t nearest_neighbor(const std::vector<std::vector<double>>& gold,
                                    const std::vector<double>& pred) {
  std::size_t best = 0;
  double best_d2 = 1e300;
  for (std::size_t j = 0; j < gold.size(); ++j) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const double d = gold[j][k] - pred[k];
      d2 += d * d;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  return best;
}

// Share of test tokens whose word is the most frequent word in train.
inline double majority_share(const std::vector<std::string>& train_words,
                             const std::vector<std::string>& test_words) {
  std::map<std::string, int> counts;
  for (const auto& w : train_words) ++counts[w];
  std::string top;
  int best = -1;
  for (const auto& [w, c] : counts)
    if (c > best) {
      best = c;
      top = w;
    }
  int hits = 0;
  for (const auto& w : test_words) hits += (w == top) ? 1 : 0;
  return test_words.empty() ? 0.0 : static_cast<double>(hits) / test_words.size();
}

// Expected nearest-neighbor accuracy when predictions carry no information:
// sum over words of (gold share of word) * (test share of word).
inline double chance_nn_accuracy(const std::vector<std::string>& gold_words,
                                 const std::vector<std::string>& test_words) {
  std::map<std::string, double> gold_share, test_share;
  for (const auto& w : gold_words) gold_share[w] += 1.0 / gold_words.size();
  for (const auto& w : test_words) test_share[w] += 1.0 / test_words.size();
  double acc = 0.0;
  for (const auto& [w, s] : test_share) {
    auto it = gold_share.find(w);
    if (it != gold_share.end()) acc += s * it->second;
  }
  return acc;
}

}  // namespace oracle
