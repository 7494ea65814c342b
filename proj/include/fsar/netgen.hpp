#pragma once

#include "fsar/spatial.hpp"

#include <cstdint>
#include <string>

namespace fsar {

enum class NetworkModel { dim, sbm, lsm };

std::string to_string(NetworkModel m);
NetworkModel parse_network_model(const std::string& name);  // "DIM", "sbm", ...

struct NetworkSpec {
  NetworkModel model = NetworkModel::dim;
  Index n = 500;
  int sbm_blocks = 5;
  std::uint64_t seed = 1;
};

struct DyadProbabilities {
  double mutual;   // P{(1,1)}
  double one_way;  // P{(1,0)} = P{(0,1)}
  double none;     // P{(0,0)}
};

DyadProbabilities dim_probabilities(Index n);
double sbm_probability(Index n, bool same_block);
double lsm_probability(Index n, double distance);

/// Dyadic independence model: unordered dyads drawn independently.
AdjacencyMatrix generate_dim(Index n, std::uint64_t seed);
/// Directed stochastic block model with uniform labels; labels optional.
AdjacencyMatrix generate_sbm(Index n, int blocks, std::uint64_t seed, std::vector<int>* labels = nullptr);
/// Latent space model with scalar U(0,1) positions; positions optional.
AdjacencyMatrix generate_lsm(Index n, std::uint64_t seed, std::vector<double>* positions = nullptr);

AdjacencyMatrix generate_network(const NetworkSpec& spec);

}  // namespace fsar
