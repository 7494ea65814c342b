#include "fsar/factor.hpp"

#include "fsar/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fsar {

namespace {

void finish_projection(DiversifiedProjection& proj) {
  const Index p = proj.M.rows();
  proj.d_max = proj.M.cols();
  proj.max_abs_entry = proj.M.size() ? proj.M.cwiseAbs().maxCoeff() : 0.0;
  if (proj.d_max > 0 && p > 0) {
    const Matrix g = proj.M.transpose() * proj.M / static_cast<double>(p);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    proj.min_eig_mtm = es.eigenvalues().minCoeff();
  }
}

// Symmetric eigen-decomposition sorted descending.
void sorted_eigen(const Matrix& s, Vector& values, Matrix* vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EstimationError("covariance eigen-decomposition failed");
  values = es.eigenvalues().reverse().cwiseMax(0.0);
  if (vectors) *vectors = es.eigenvectors().rowwise().reverse();
}

}  // namespace

NodeSplit split_nodes(Index n, double holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw std::invalid_argument("holdout fraction must lie in (0, 1)");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto eng = rng::make_engine(seed, rng::Stream::partition);
  // Fisher-Yates with the portable integer distribution
  for (Index i = n - 1; i > 0; --i) std::swap(order[i], order[rng::uniform_int(eng, 0, static_cast<int>(i))]);
  const auto h = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
  NodeSplit s;
  s.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(h));
  s.main.assign(order.begin() + static_cast<std::ptrdiff_t>(h), order.end());
  std::sort(s.holdout.begin(), s.holdout.end());
  std::sort(s.main.begin(), s.main.end());
  return s;
}

DiversifiedProjection build_projection_random_partition(const Matrix& y, const Matrix& x,
                                                        const std::vector<std::vector<int>>& supports,
                                                        const SpatialWeights& w, Index d_max,
                                                        double holdout_fraction, std::uint64_t seed,
                                                        const CmleOptions& cmle, int workers) {
  const Index n = y.rows();
  const Index p = y.cols();
  if (d_max < 1) throw std::invalid_argument("d_max must be positive");
  if (d_max > p) throw std::invalid_argument("d_max exceeds the number of responses");
  NodeSplit split = split_nodes(n, holdout_fraction, seed);
  const Index nh = static_cast<Index>(split.holdout.size());
  if (nh < d_max + 5) {
    std::ostringstream os;
    os << "holdout has " << nh << " nodes; at least d_max + 5 = " << d_max + 5 << " are required";
    throw DataError(os.str());
  }
  {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int i : split.holdout) seen[i] = 1;
    for (int i : split.main)
      if (seen[i]) throw std::logic_error("holdout and main parts overlap");
  }

  const SpatialWeights wh = induced_weights(w, split.holdout);
  const Matrix yh = select_rows(y, split.holdout);
  const Matrix xh = select_rows(x, split.holdout);
  const auto est = fit_components(yh, xh, supports, wh, cmle, workers);
  const Matrix eh = residuals(est, yh, xh, wh);

  const Matrix cov = eh.transpose() * eh / static_cast<double>(nh);
  Vector values;
  Matrix vectors;
  sorted_eigen(cov, values, &vectors);
  if (!(values(0) > 0.0)) throw EstimationError("holdout residual covariance is degenerate");

  DiversifiedProjection proj;
  proj.M = vectors.leftCols(d_max) * std::sqrt(static_cast<double>(p));
  for (Index k = 0; k < d_max; ++k) {
    Index at = 0;
    proj.M.col(k).cwiseAbs().maxCoeff(&at);
    if (proj.M(at, k) < 0.0) proj.M.col(k) = -proj.M.col(k);
  }
  proj.construction = ProjectionKind::random_partition;
  proj.holdout_fraction = holdout_fraction;
  proj.holdout = std::move(split.holdout);
  proj.main = std::move(split.main);
  proj.holdout_eigenvalues = values;
  finish_projection(proj);
  return proj;
}

DiversifiedProjection build_projection_hadamard(Index p, Index d_max, std::uint64_t seed) {
  if (p < 1 || d_max < 1) throw std::invalid_argument("Hadamard projection needs p, d_max >= 1");
  Index size = 1;
  while (size < p) size *= 2;
  if (d_max > std::min(p, size - 1))
    throw std::invalid_argument("d_max exceeds the available distinct Hadamard columns");

  // Sylvester order: h(i, k) = (-1)^{popcount(i & k)}
  auto h = [](Index i, Index k) { return (__builtin_popcountll(static_cast<unsigned long long>(i & k)) & 1) ? -1.0 : 1.0; };
  std::vector<Index> rows(static_cast<std::size_t>(size));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::vector<double> sign(static_cast<std::size_t>(p), 1.0);
  if (size != p) {
    auto eng = rng::make_engine(seed, rng::Stream::hadamard);
    for (Index i = size - 1; i > 0; --i) std::swap(rows[i], rows[rng::uniform_int(eng, 0, static_cast<int>(i))]);
    for (auto& s : sign) s = rng::bernoulli(eng, 0.5) ? 1.0 : -1.0;
  }
  DiversifiedProjection proj;
  proj.M.resize(p, d_max);
  for (Index i = 0; i < p; ++i)
    for (Index k = 0; k < d_max; ++k) proj.M(i, k) = sign[i] * h(rows[i], k + 1);
  proj.construction = ProjectionKind::hadamard;
  finish_projection(proj);
  return proj;
}

DiversifiedProjection user_projection(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("projection matrix is empty");
  if (!m.allFinite()) throw DataError("projection matrix has non-finite entries");
  DiversifiedProjection proj;
  proj.M = m;
  proj.construction = ProjectionKind::user_supplied;
  finish_projection(proj);
  return proj;
}

DiversifiedProjection truncate_projection(const DiversifiedProjection& proj, Index d) {
  if (d < 1 || d > proj.M.cols()) throw std::invalid_argument("truncated factor count out of range");
  DiversifiedProjection out = proj;
  out.M = proj.M.leftCols(d);
  finish_projection(out);
  return out;
}

Vector residual_eigenvalues(const Matrix& e) {
  Vector values;
  sorted_eigen(e.transpose() * e / static_cast<double>(e.rows()), values, nullptr);
  return values;
}

Vector eigenvalue_ratios(const Vector& ev) {
  if (ev.size() < 2) return Vector(0);
  Vector r(ev.size() - 1);
  const double floor = std::max(ev(0), 1.0) * 1e-300;
  for (Index j = 0; j + 1 < ev.size(); ++j) r(j) = ev(j) / std::max(ev(j + 1), floor);
  return r;
}

FactorEstimate estimate_factors(const Matrix& e, const DiversifiedProjection& proj) {
  if (e.cols() != proj.M.rows()) throw std::invalid_argument("residual columns do not match the projection rows");
  FactorEstimate f;
  f.Zhat = e * proj.M / static_cast<double>(e.cols());
  f.eigenvalues = residual_eigenvalues(e);
  f.ratios = eigenvalue_ratios(f.eigenvalues);
  return f;
}

int select_num_factors(const Vector& ev, int cap) {
  if (ev.size() < 2) throw std::invalid_argument("factor count needs at least two eigenvalues");
  if (!(ev(0) > 1e-12)) throw EstimationError("all eigenvalues are numerically zero");
  const Vector r = eigenvalue_ratios(ev);
  const Index upto = std::min<Index>(r.size(), std::max(cap, 1));
  Index best = 0;
  r.head(upto).maxCoeff(&best);
  return static_cast<int>(best) + 1;
}

Matrix alignment_from_loadings(const Matrix& m, const Matrix& b) {
  if (m.rows() != b.rows()) throw std::invalid_argument("M and B have different row counts");
  return m.transpose() * b / static_cast<double>(m.rows());
}

Matrix alignment_least_squares(const Matrix& zhat, const Matrix& z) {
  // Zhat = Z H' + U  =>  H' = (Z'Z)^{-1} Z'Zhat
  const Matrix ht = (z.transpose() * z).ldlt().solve(z.transpose() * zhat);
  return ht.transpose();
}

double factor_error(const Matrix& zhat, const Matrix& z, const Matrix& h) {
  return (zhat - z * h.transpose()).norm() / std::sqrt(static_cast<double>(zhat.rows()));
}

LoadingDiagnostic loading_diagnostic(const Vector& ev, Index p, double ratio_threshold) {
  LoadingDiagnostic d;
  if (ev.size() < 2 || !(ev(0) > 0.0)) {
    d.weak = true;
    return d;
  }
  d.factors = select_num_factors(ev);
  d.max_ratio = eigenvalue_ratios(ev)(d.factors - 1);
  d.min_eigenvalue = ev(d.factors - 1) / static_cast<double>(p);
  d.weak = d.max_ratio < ratio_threshold;
  return d;
}

}  // namespace fsar
