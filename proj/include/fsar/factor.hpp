#pragma once

#include "fsar/cmle.hpp"

#include <cstdint>
#include <vector>

namespace fsar {

enum class ProjectionKind { random_partition, hadamard, user_supplied };

struct DiversifiedProjection {
  Matrix M;  // p x d_max
  Index d_max = 0;
  ProjectionKind construction = ProjectionKind::user_supplied;
  double holdout_fraction = 0.0;
  std::vector<int> holdout;       // random partition only
  std::vector<int> main;          // nodes left for estimation
  Vector holdout_eigenvalues;     // descending, holdout residual covariance
  double min_eig_mtm = 0.0;       // smallest eigenvalue of M'M/p
  double max_abs_entry = 0.0;
};

struct FactorEstimate {
  Matrix Zhat;       // n x d_max
  Vector eigenvalues;  // descending eigenvalues of E'E/n
  Vector ratios;       // eigenvalues(j) / eigenvalues(j+1)
};

/// Shuffled split into sorted holdout and main node lists.
struct NodeSplit {
  std::vector<int> holdout;
  std::vector<int> main;
};
NodeSplit split_nodes(Index n, double holdout_fraction, std::uint64_t seed);

/// M from the top principal directions of the holdout CMLE residuals,
/// scaled by sqrt(p). Holdout CMLE runs on the induced, re-normalized
/// holdout subnetwork only.
DiversifiedProjection build_projection_random_partition(const Matrix& y, const Matrix& x,
                                                        const std::vector<std::vector<int>>& supports,
                                                        const SpatialWeights& w, Index d_max,
                                                        double holdout_fraction, std::uint64_t seed,
                                                        const CmleOptions& cmle = {}, int workers = 1);

/// Distinct Walsh-Hadamard columns; for p not a power of two a random
/// subset of rows with random signs is used.
DiversifiedProjection build_projection_hadamard(Index p, Index d_max, std::uint64_t seed);

DiversifiedProjection user_projection(const Matrix& m);

/// First d columns of M, split and diagnostics kept.
DiversifiedProjection truncate_projection(const DiversifiedProjection& proj, Index d);

/// Descending eigenvalues of E'E / n, clipped at zero.
Vector residual_eigenvalues(const Matrix& e);
Vector eigenvalue_ratios(const Vector& eigenvalues);

/// Zhat = E M / p plus the covariance eigenvalue diagnostics.
FactorEstimate estimate_factors(const Matrix& e, const DiversifiedProjection& proj);

/// argmax of the eigenvalue ratio over 1 <= j <= min(p-1, cap).
int select_num_factors(const Vector& eigenvalues, int cap = 30);

/// H = M'B/p.
Matrix alignment_from_loadings(const Matrix& m, const Matrix& b);
/// Least-squares H with Zhat ~ Z H'.
Matrix alignment_least_squares(const Matrix& zhat, const Matrix& z);
/// |Zhat - Z H'|_F / sqrt(n).
double factor_error(const Matrix& zhat, const Matrix& z, const Matrix& h);

/// Strength of the estimated loadings: eigenvalues of the projected
/// loading Gram, approximated by the leading holdout covariance eigenvalues
/// over p. Weak when the eigenvalue ratio shows no spike.
struct LoadingDiagnostic {
  int factors = 0;            // count chosen by the ratio rule
  double min_eigenvalue = 0;  // smallest of the first `factors` eigenvalues / p
  double max_ratio = 0;
  bool weak = false;
};
LoadingDiagnostic loading_diagnostic(const Vector& eigenvalues, Index p, double ratio_threshold = 1.5);

}  // namespace fsar
