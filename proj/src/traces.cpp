#include "fsar/traces.hpp"

#include "fsar/random.hpp"

#include <Eigen/LU>

namespace fsar {

Matrix dense_g(const SpatialWeights& w, double rho) {
  const Index n = w.size();
  const Matrix wd = w.to_dense();
  const Matrix s = Matrix::Identity(n, n) - rho * wd;
  Eigen::PartialPivLU<Matrix> lu(s);
  // G = W S^{-1} = S^{-1} W, since W commutes with S
  return lu.solve(wd);
}

Vector diag_g_series(const SpatialWeights& w, double rho) {
  auto powers = w.power_diagonals();
  auto spec = w.spectrum();
  if (!powers || !spec) throw std::logic_error("power series diagonal needs the spectral route");
  const Index n = w.size();
  const int terms = SpatialWeights::kPowerTerms;
  Vector coef(terms);
  double c = 1.0;
  for (int m = 0; m < terms; ++m) {
    coef(m) = c;
    c *= rho;
  }
  Vector d = (*powers) * coef;
  if (n > 0) {
    const double tail = spec->trace_g(rho) - d.sum();
    d.array() += tail / static_cast<double>(n);
  }
  return d;
}

GStatistics g_statistics(const SarTransform& s, const TraceOptions& opts) {
  const SpatialWeights& w = s.weights();
  const Index n = w.size();
  GStatistics out;
  out.rho = s.rho();

  if (n <= opts.dense_limit) {
    const Matrix g = dense_g(w, s.rho());
    out.tr_g = g.trace();
    out.tr_g2 = (g.array() * g.transpose().array()).sum();
    out.tr_gtg = g.squaredNorm();
    out.diag = g.diagonal();
    out.exact = true;
    return out;
  }

  auto eng = rng::make_engine(opts.seed, rng::Stream::probes, static_cast<std::uint64_t>(n));
  const int k = std::max(opts.probes, 1);
  Matrix z(n, k);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < n; ++i) z(i, c) = rng::bernoulli(eng, 0.5) ? 1.0 : -1.0;

  auto spec = w.spectrum();
  double gtg = 0.0;
  double tg = 0.0;
  double tg2 = 0.0;
  Vector diag_num = Vector::Zero(n);
  for (Index c = 0; c < k; ++c) {
    const Vector gz = s.g(z.col(c));
    gtg += gz.squaredNorm();
    if (spec) continue;
    tg += z.col(c).dot(gz);
    tg2 += z.col(c).dot(s.g(gz));
    diag_num.array() += z.col(c).array() * gz.array();
  }
  out.tr_gtg = gtg / k;

  if (spec) {
    out.tr_g = spec->trace_g(s.rho());
    out.tr_g2 = spec->trace_g2(s.rho());
    out.diag = diag_g_series(w, s.rho());
  } else {
    out.tr_g = tg / k;
    out.tr_g2 = tg2 / k;
    out.diag = diag_num / k;
  }
  out.exact = false;
  return out;
}

}  // namespace fsar
