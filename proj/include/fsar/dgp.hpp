#pragma once

#include "fsar/netgen.hpp"
#include "fsar/spatial.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace fsar {

enum class NoiseKind { gaussian, sub_weibull };

struct DgpConfig {
  Index n = 500;
  Index p = 50;
  Index q = 20;
  Index d = 3;
  NetworkModel network = NetworkModel::dim;
  int sbm_blocks = 5;
  std::uint64_t seed = 1;        // network, X, Z, noise
  std::uint64_t truth_seed = 1;  // rho, beta, B, tau
  std::pair<double, double> tau_range{0.1, 0.2};
  std::pair<double, double> beta_range{0.5, 1.0};
  std::pair<double, double> rho_range{0.2, 0.9};
  int sparsity = -1;  // -1 selects the default for q; 0 gives all-zero beta
  NoiseKind noise = NoiseKind::gaussian;
  double weibull_shape = 1.0;  // tail order of the sub-Weibull toggle

  int model_size() const;
  void validate() const;
};

/// 2, 5, 10 for q = 5, 10, 20; otherwise q/2.
int default_sparsity(Index q);

struct GroundTruth {
  Vector rho;     // p
  Matrix beta;    // p x q
  Matrix B;       // p x d
  Vector tau;     // p
  std::vector<std::vector<int>> supports;
};

struct SimulatedData {
  Matrix Y;  // n x p
  Matrix X;  // n x q
  Matrix Z;  // n x d
  GroundTruth truth;
  AdjacencyMatrix adjacency;
  SpatialWeights W;
};

/// Component j's parameters depend only on (truth_seed, j), so the truth of
/// the first p components is shared across configurations with larger p.
GroundTruth draw_truth(const DgpConfig& cfg);

/// Network generated from cfg.seed.
SpatialWeights draw_weights(const DgpConfig& cfg, AdjacencyMatrix* adjacency = nullptr);

SimulatedData simulate(const DgpConfig& cfg);
SimulatedData simulate(const DgpConfig& cfg, const GroundTruth& truth);
/// Uses the supplied network instead of drawing one.
SimulatedData simulate(const DgpConfig& cfg, const GroundTruth& truth, const AdjacencyMatrix& adjacency,
                       const SpatialWeights& w);

/// Draws the n x p error matrix Omega for the given tau.
Matrix draw_noise(const DgpConfig& cfg, const Vector& tau);

}  // namespace fsar
