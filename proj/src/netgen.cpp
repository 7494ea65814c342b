#include "fsar/netgen.hpp"

#include "fsar/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace fsar {

std::string to_string(NetworkModel m) {
  switch (m) {
    case NetworkModel::dim: return "DIM";
    case NetworkModel::sbm: return "SBM";
    case NetworkModel::lsm: return "LSM";
  }
  return "?";
}

NetworkModel parse_network_model(const std::string& name) {
  std::string u = name;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  if (u == "DIM") return NetworkModel::dim;
  if (u == "SBM") return NetworkModel::sbm;
  if (u == "LSM") return NetworkModel::lsm;
  throw std::invalid_argument("unknown network model '" + name + "' (expected DIM, SBM or LSM)");
}

DyadProbabilities dim_probabilities(Index n) {
  if (n < 3) throw std::invalid_argument("DIM needs n >= 3");
  const double nn = static_cast<double>(n);
  DyadProbabilities p{};
  p.mutual = 2.0 / nn;
  p.one_way = 0.5 * std::pow(nn, -0.8);
  p.none = 1.0 - p.mutual - 2.0 * p.one_way;
  return p;
}

double sbm_probability(Index n, bool same_block) {
  if (n < 9) throw std::invalid_argument("SBM needs n >= 9");
  return (same_block ? 9.0 : 3.0) / static_cast<double>(n);
}

double lsm_probability(Index n, double distance) {
  // logistic(-0.25 n d), written to stay finite for large n d
  const double t = 0.25 * static_cast<double>(n) * distance;
  return 1.0 / (1.0 + std::exp(t));
}

AdjacencyMatrix generate_dim(Index n, std::uint64_t seed) {
  const DyadProbabilities p = dim_probabilities(n);
  auto eng = rng::make_engine(seed, rng::Stream::network);
  std::vector<std::pair<int, int>> edges;
  const double c1 = p.mutual;
  const double c2 = c1 + p.one_way;
  const double c3 = c2 + p.one_way;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double u = rng::uniform(eng);
      if (u >= c3) continue;
      if (u < c1) {
        edges.emplace_back(i, j);
        edges.emplace_back(j, i);
      } else if (u < c2) {
        edges.emplace_back(i, j);
      } else {
        edges.emplace_back(j, i);
      }
    }
  }
  return AdjacencyMatrix::from_edges(n, edges);
}

AdjacencyMatrix generate_sbm(Index n, int blocks, std::uint64_t seed, std::vector<int>* labels) {
  if (blocks < 1) throw std::invalid_argument("SBM needs at least one block");
  if (n < blocks) throw std::invalid_argument("SBM needs n >= number of blocks");
  const double within = sbm_probability(n, true);
  const double across = sbm_probability(n, false);
  auto eng = rng::make_engine(seed, rng::Stream::network);
  std::vector<int> lab(static_cast<std::size_t>(n));
  for (auto& l : lab) l = rng::uniform_int(eng, 0, blocks - 1);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double prob = lab[i] == lab[j] ? within : across;
      if (rng::uniform(eng) < prob) edges.emplace_back(i, j);
    }
  if (labels) *labels = std::move(lab);
  return AdjacencyMatrix::from_edges(n, edges);
}

AdjacencyMatrix generate_lsm(Index n, std::uint64_t seed, std::vector<double>* positions) {
  if (n < 2) throw std::invalid_argument("LSM needs n >= 2");
  auto eng = rng::make_engine(seed, rng::Stream::network);
  std::vector<double> pos(static_cast<std::size_t>(n));
  for (auto& d : pos) d = rng::uniform(eng);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (rng::uniform(eng) < lsm_probability(n, std::abs(pos[i] - pos[j]))) edges.emplace_back(i, j);
    }
  if (positions) *positions = std::move(pos);
  return AdjacencyMatrix::from_edges(n, edges);
}

AdjacencyMatrix generate_network(const NetworkSpec& spec) {
  switch (spec.model) {
    case NetworkModel::dim: return generate_dim(spec.n, spec.seed);
    case NetworkModel::sbm: return generate_sbm(spec.n, spec.sbm_blocks, spec.seed);
    case NetworkModel::lsm: return generate_lsm(spec.n, spec.seed);
  }
  throw std::invalid_argument("unknown network model");
}

}  // namespace fsar
