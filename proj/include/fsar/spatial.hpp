#pragma once

#include "fsar/types.hpp"

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace fsar {

/// Binary directed network A with a_{ii} = 0 expected (checked by row_normalize).
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(Index n);

  /// Duplicate edges collapse to a single 1.
  static AdjacencyMatrix from_edges(Index n, const std::vector<std::pair<int, int>>& edges);
  /// Every entry must be exactly 0 or 1.
  static AdjacencyMatrix from_dense(const Matrix& a);

  Index size() const { return a_.rows(); }
  Index edge_count() const { return a_.nonZeros(); }
  const SparseMatrix& pattern() const { return a_; }
  bool has_self_loops() const;
  std::vector<std::pair<int, int>> edges() const;
  std::vector<int> out_degrees() const;
  Matrix to_dense() const { return Matrix(a_); }

 private:
  SparseMatrix a_;
};

/// Eigenvalues of a real matrix, split into nonzero real values and one
/// representative (Im > 0) of each conjugate pair.
struct Spectrum {
  std::vector<double> real;
  std::vector<std::complex<double>> upper;
  Index zeros = 0;

  Index size() const { return zeros + static_cast<Index>(real.size() + 2 * upper.size()); }
  std::vector<std::complex<double>> all() const;
  double max_modulus() const;

  /// log|det(I - rho W)|; throws EstimationError when a factor vanishes.
  double log_det(double rho) const;
  /// tr(G) and tr(G^2) for G = W (I - rho W)^{-1}.
  double trace_g(double rho) const;
  double trace_g2(double rho) const;
};

/// Eigenvalues via strongly connected components (the spectrum of a
/// reducible matrix is the union of its diagonal-block spectra).
Spectrum compute_spectrum(const SparseMatrix& w);

/// Spatial weight matrix W, nonnegative with row sums at most one. Immutable;
/// copies share state.
class SpatialWeights {
 public:
  static constexpr Index kDefaultSpectralLimit = 3000;

  SpatialWeights() = default;

  Index size() const;
  const SparseMatrix& matrix() const;
  const SparseMatrix& transposed() const;
  const std::vector<int>& degrees() const;
  std::uint64_t fingerprint() const;

  Vector multiply(const Eigen::Ref<const Vector>& v) const;
  Vector multiply_transpose(const Eigen::Ref<const Vector>& v) const;

  Index spectral_limit() const;
  bool uses_spectrum() const;
  /// Cached eigenvalues; nullptr when n exceeds the spectral limit.
  std::shared_ptr<const Spectrum> spectrum() const;

  /// n x kPowerTerms matrix whose column m-1 is diag(W^m); nullptr when n
  /// exceeds the spectral limit. Computed once and shared.
  static constexpr int kPowerTerms = 64;
  std::shared_ptr<const Matrix> power_diagonals() const;

  double norm_1() const;    // max column sum
  double norm_inf() const;  // max row sum
  Matrix to_dense() const { return Matrix(matrix()); }

 private:
  struct State;
  std::shared_ptr<const State> state_;
  friend SpatialWeights make_weights(SparseMatrix, std::vector<int>, Index);
};

/// w_{ij} = a_{ij} / n_i, zero rows kept for zero-degree nodes.
SpatialWeights row_normalize(const AdjacencyMatrix& adj,
                             Index spectral_limit = SpatialWeights::kDefaultSpectralLimit);

/// Wraps an already-weighted matrix; rows may sum to less than one.
SpatialWeights make_weights(SparseMatrix w, std::vector<int> degrees, Index spectral_limit);

/// Binary pattern of W (w_ij > 0).
AdjacencyMatrix adjacency_of(const SpatialWeights& w);

/// Induced subnetwork on `nodes` (in the given order), re-row-normalized.
SpatialWeights induced_weights(const SpatialWeights& w, const std::vector<int>& nodes);

/// Submatrix of W on `nodes` with the original weights (no re-normalization).
SpatialWeights restricted_weights(const SpatialWeights& w, const std::vector<int>& nodes);

double log_det_s(const SpatialWeights& w, double rho);
Vector apply_s(const SpatialWeights& w, double rho, const Eigen::Ref<const Vector>& v);
Vector solve_s(const SpatialWeights& w, double rho, const Eigen::Ref<const Vector>& v);
Vector solve_s_transpose(const SpatialWeights& w, double rho, const Eigen::Ref<const Vector>& v);

/// S(rho) = I - rho W bound to a weight matrix, with cached sparse operators.
class SarTransform {
 public:
  SarTransform(const SpatialWeights& w, double rho);

  double rho() const { return rho_; }
  const SpatialWeights& weights() const { return *w_; }
  double log_det() const;

  Vector apply(const Eigen::Ref<const Vector>& v) const;
  Vector solve(const Eigen::Ref<const Vector>& v) const;
  Vector solve_transpose(const Eigen::Ref<const Vector>& v) const;
  /// G v = W S^{-1} v and G' v = S^{-T} W' v.
  Vector g(const Eigen::Ref<const Vector>& v) const;
  Vector g_transpose(const Eigen::Ref<const Vector>& v) const;

 private:
  const SpatialWeights* w_;
  double rho_;
  SparseMatrix s_;
  SparseMatrix st_;
};

/// ||S^{-1}||_1 and ||S^{-1}||_inf by n solves; diagnostics only.
std::pair<double, double> inverse_norms(const SpatialWeights& w, double rho);

/// log|S(rho)| with a memo of the optimizer grid values.
class LogDet {
 public:
  explicit LogDet(const SpatialWeights& w);

  double operator()(double rho) const;
  /// Values on `grid`, computed once per distinct grid.
  const std::vector<double>& on_grid(const std::vector<double>& grid) const;
  const SpatialWeights& weights() const { return w_; }

 private:
  SpatialWeights w_;
  std::shared_ptr<const Spectrum> spectrum_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<double>, std::vector<double>> grid_cache_;
};

/// Process-wide spectrum memo keyed by weight fingerprint. Identical networks
/// generated in different experiment cells share one eigen-decomposition.
void set_spectrum_cache_capacity(std::size_t bytes);
std::size_t spectrum_cache_entries();

}  // namespace fsar
