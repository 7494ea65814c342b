#pragma once

// Shared helpers for the unit and property tests: a tiny seeded generator
// and dense reference computations.

#include "fsar/spatial.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fsar::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  std::mt19937_64& engine() { return eng_; }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(eng_); }

  Vector vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  Matrix matrix(Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }

  // Directed Erdos-Renyi graph with mean out-degree `deg`; some nodes may be isolated.
  AdjacencyMatrix adjacency(Index n, double deg) {
    std::vector<std::pair<int, int>> edges;
    const double prob = std::min(1.0, deg / static_cast<double>(std::max<Index>(n - 1, 1)));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j && coin(prob)) edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return AdjacencyMatrix::from_edges(n, edges);
  }
  SpatialWeights weights(Index n, double deg) { return row_normalize(adjacency(n, deg)); }

 private:
  std::mt19937_64 eng_;
};

inline AdjacencyMatrix cycle(Index n) {
  std::vector<std::pair<int, int>> e;
  for (Index i = 0; i < n; ++i) e.emplace_back(static_cast<int>(i), static_cast<int>((i + 1) % n));
  return AdjacencyMatrix::from_edges(n, e);
}

inline double dense_logdet(const SpatialWeights& w, double rho) {
  const Index n = w.size();
  const Matrix s = Matrix::Identity(n, n) - rho * w.to_dense();
  return std::log(std::abs(Eigen::PartialPivLU<Matrix>(s).determinant()));
}

// log|det| summed over LU pivots, safe for large n.
inline double dense_logdet_lu(const SpatialWeights& w, double rho) {
  const Index n = w.size();
  const Matrix s = Matrix::Identity(n, n) - rho * w.to_dense();
  Eigen::PartialPivLU<Matrix> lu(s);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) acc += std::log(std::abs(lu.matrixLU()(i, i)));
  return acc;
}

// Plain-loop likelihood, written without Eigen expressions.
inline double scalar_loglik(double rho, const Vector& gamma, double tau, const Vector& y, const Matrix& r,
                            const SpatialWeights& w) {
  const Index n = y.size();
  const Matrix wd = w.to_dense();
  double rss = 0.0;
  for (Index i = 0; i < n; ++i) {
    double wy = 0.0;
    for (Index k = 0; k < n; ++k) wy += wd(i, k) * y(k);
    double fit = 0.0;
    for (Index c = 0; c < r.cols(); ++c) fit += r(i, c) * gamma(c);
    const double e = y(i) - rho * wy - fit;
    rss += e * e;
  }
  return -0.5 * static_cast<double>(n) * std::log(tau) + dense_logdet(w, rho) - rss / (2.0 * tau);
}

}  // namespace fsar::testing
