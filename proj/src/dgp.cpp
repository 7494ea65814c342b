#include "fsar/dgp.hpp"

#include "fsar/random.hpp"

#include <boost/random/weibull_distribution.hpp>

#include <cmath>
#include <sstream>

namespace fsar {

int default_sparsity(Index q) {
  switch (q) {
    case 5: return 2;
    case 10: return 5;
    case 20: return 10;
    default: return static_cast<int>(q / 2);
  }
}

int DgpConfig::model_size() const { return sparsity < 0 ? default_sparsity(q) : sparsity; }

void DgpConfig::validate() const {
  std::ostringstream os;
  if (n < 2) os << "n must be at least 2; ";
  if (p < 1) os << "p must be positive; ";
  if (q < 0) os << "q must be nonnegative; ";
  if (d < 1) os << "d must be at least 1; ";
  if (p <= d) os << "p must exceed d; ";
  if (model_size() > q) os << "model size exceeds q; ";
  if (!(rho_range.first <= rho_range.second) || std::abs(rho_range.first) >= 1.0 ||
      std::abs(rho_range.second) >= 1.0)
    os << "rho range must lie inside (-1, 1); ";
  if (!(tau_range.first > 0.0 && tau_range.first <= tau_range.second)) os << "tau range must be positive; ";
  if (!(beta_range.first <= beta_range.second)) os << "beta range is empty; ";
  if (noise == NoiseKind::sub_weibull && !(weibull_shape > 0.0)) os << "Weibull shape must be positive; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw std::invalid_argument("invalid DGP config: " + msg);
}

GroundTruth draw_truth(const DgpConfig& cfg) {
  cfg.validate();
  const int s = cfg.model_size();
  GroundTruth t;
  t.rho.resize(cfg.p);
  t.tau.resize(cfg.p);
  t.beta = Matrix::Zero(cfg.p, cfg.q);
  t.B.resize(cfg.p, cfg.d);
  t.supports.resize(static_cast<std::size_t>(cfg.p));
  for (Index j = 0; j < cfg.p; ++j) {
    auto eng = rng::make_engine(cfg.truth_seed, rng::Stream::truth, static_cast<std::uint64_t>(j));
    t.rho(j) = rng::uniform(eng, cfg.rho_range.first, cfg.rho_range.second);
    t.tau(j) = rng::uniform(eng, cfg.tau_range.first, cfg.tau_range.second);
    for (int h = 0; h < s; ++h) {
      t.beta(j, h) = rng::uniform(eng, cfg.beta_range.first, cfg.beta_range.second);
      if (t.beta(j, h) != 0.0) t.supports[static_cast<std::size_t>(j)].push_back(h);
    }
    for (Index k = 0; k < cfg.d; ++k) t.B(j, k) = rng::normal(eng);
  }
  return t;
}

SpatialWeights draw_weights(const DgpConfig& cfg, AdjacencyMatrix* adjacency) {
  NetworkSpec spec;
  spec.model = cfg.network;
  spec.n = cfg.n;
  spec.sbm_blocks = cfg.sbm_blocks;
  spec.seed = cfg.seed;
  AdjacencyMatrix a = generate_network(spec);
  SpatialWeights w = row_normalize(a);
  if (adjacency) *adjacency = std::move(a);
  return w;
}

Matrix draw_noise(const DgpConfig& cfg, const Vector& tau) {
  Matrix omega(cfg.n, tau.size());
  for (Index j = 0; j < tau.size(); ++j) {
    auto eng = rng::make_engine(cfg.seed, rng::Stream::noise, static_cast<std::uint64_t>(j));
    const double sd = std::sqrt(tau(j));
    if (cfg.noise == NoiseKind::gaussian) {
      for (Index i = 0; i < cfg.n; ++i) omega(i, j) = rng::normal(eng, 0.0, sd);
    } else {
      // symmetric Weibull, rescaled to variance tau
      const double k = cfg.weibull_shape;
      const double scale = sd / std::sqrt(std::tgamma(1.0 + 2.0 / k));
      boost::random::weibull_distribution<double> wb(k, 1.0);
      for (Index i = 0; i < cfg.n; ++i) {
        const double mag = wb(eng);
        omega(i, j) = (rng::bernoulli(eng, 0.5) ? mag : -mag) * scale;
      }
    }
  }
  return omega;
}

namespace {

Matrix standard_normal(Index n, Index cols, std::uint64_t seed, rng::Stream stream) {
  Matrix m(n, cols);
  for (Index c = 0; c < cols; ++c) {
    auto eng = rng::make_engine(seed, stream, static_cast<std::uint64_t>(c));
    for (Index i = 0; i < n; ++i) m(i, c) = rng::normal(eng);
  }
  return m;
}

}  // namespace

SimulatedData simulate(const DgpConfig& cfg, const GroundTruth& truth, const AdjacencyMatrix& adjacency,
                       const SpatialWeights& w) {
  cfg.validate();
  if (w.size() != cfg.n) throw std::invalid_argument("network size does not match n");
  if (truth.rho.size() != cfg.p || truth.beta.rows() != cfg.p || truth.beta.cols() != cfg.q ||
      truth.B.rows() != cfg.p || truth.B.cols() != cfg.d || truth.tau.size() != cfg.p)
    throw std::invalid_argument("ground truth dimensions do not match the config");
  SimulatedData out;
  out.truth = truth;
  out.adjacency = adjacency;
  out.W = w;
  out.X = standard_normal(cfg.n, cfg.q, cfg.seed, rng::Stream::covariates);
  out.Z = standard_normal(cfg.n, cfg.d, cfg.seed, rng::Stream::factors);
  const Matrix omega = draw_noise(cfg, truth.tau);
  const Matrix rhs = out.X * truth.beta.transpose() + out.Z * truth.B.transpose() + omega;
  out.Y.resize(cfg.n, cfg.p);
  for (Index j = 0; j < cfg.p; ++j) out.Y.col(j) = solve_s(w, truth.rho(j), rhs.col(j));
  return out;
}

SimulatedData simulate(const DgpConfig& cfg, const GroundTruth& truth) {
  AdjacencyMatrix a;
  SpatialWeights w = draw_weights(cfg, &a);
  return simulate(cfg, truth, a, w);
}

SimulatedData simulate(const DgpConfig& cfg) { return simulate(cfg, draw_truth(cfg)); }

}  // namespace fsar
