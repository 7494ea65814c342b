#include "fsar/spatial.hpp"

#include "lapack_eigen.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <list>
#include <sstream>
#include <unordered_map>

namespace fsar {

namespace {

constexpr double kZeroEigen = 1e-14;
constexpr double kSpectralSlack = 1e-8;

void check_rho(double rho) {
  if (!(std::abs(rho) < 1.0)) {
    std::ostringstream os;
    os << "spatial coefficient must satisfy |rho| < 1, got " << rho;
    throw std::invalid_argument(os.str());
  }
}

void check_dim(Index n, Index m) {
  if (n != m) {
    std::ostringstream os;
    os << "dimension mismatch: weights are " << n << "x" << n << ", vector has " << m;
    throw std::invalid_argument(os.str());
  }
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// Sum of log factors, multiplied in blocks so that most terms cost one
// multiply instead of one log.
class LogAccumulator {
 public:
  void add(double m) {
    if (m < 1e-100 || m > 1e100) {
      total_ += std::log(m);
      return;
    }
    prod_ *= m;
    if (++count_ == 32 || prod_ < 1e-200 || prod_ > 1e200) flush();
  }
  double value() {
    flush();
    return total_;
  }

 private:
  void flush() {
    total_ += std::log(prod_);
    prod_ = 1.0;
    count_ = 0;
  }
  double total_ = 0.0;
  double prod_ = 1.0;
  int count_ = 0;
};

[[noreturn]] void vanishing_factor(double rho) {
  std::ostringstream os;
  os << "log-determinant is not finite at rho = " << rho << " (|1 - rho*lambda| < 1e-300)";
  throw EstimationError(os.str());
}

// Process-wide memo of spectra, bounded by approximate byte size.
class SpectrumCache {
 public:
  std::shared_ptr<const Spectrum> find(std::uint64_t key) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(key);
    if (it == index_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  void insert(std::uint64_t key, std::shared_ptr<const Spectrum> s) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (index_.count(key) != 0) return;
    order_.emplace_front(key, std::move(s));
    index_[key] = order_.begin();
    bytes_ += footprint(*order_.front().second);
    trim();
  }

  void set_capacity(std::size_t bytes) {
    std::lock_guard<std::mutex> lock(mutex_);
    capacity_ = bytes;
    trim();
  }

  std::size_t entries() {
    std::lock_guard<std::mutex> lock(mutex_);
    return index_.size();
  }

 private:
  static std::size_t footprint(const Spectrum& s) {
    return sizeof(Spectrum) + s.real.size() * sizeof(double) +
           s.upper.size() * sizeof(std::complex<double>);
  }
  void trim() {
    while (bytes_ > capacity_ && !order_.empty()) {
      bytes_ -= footprint(*order_.back().second);
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }

  using Entry = std::pair<std::uint64_t, std::shared_ptr<const Spectrum>>;
  std::mutex mutex_;
  std::list<Entry> order_;
  std::unordered_map<std::uint64_t, std::list<Entry>::iterator> index_;
  std::size_t bytes_ = 0;
  std::size_t capacity_ = std::size_t{256} << 20;
};

SpectrumCache& spectrum_cache() {
  static SpectrumCache cache;
  return cache;
}

constexpr Index kLapackMin = 64;  // below this Eigen is as fast

void append_eigenvalues(const Eigen::VectorXcd& ev, Spectrum& out) {
  const Index m = ev.size();
  for (Index i = 0; i < m; ++i) {
    const std::complex<double> z = ev(i);
    if (z.imag() == 0.0) {
      if (std::abs(z.real()) < kZeroEigen)
        ++out.zeros;
      else
        out.real.push_back(z.real());
      continue;
    }
    // both solvers emit complex eigenvalues as adjacent conjugate pairs
    if (i + 1 >= m || std::abs(ev(i + 1) - std::conj(z)) > 1e-8 * std::max(1.0, std::abs(z)))
      throw EstimationError("eigenvalues are not closed under conjugation");
    if (std::abs(z) < kZeroEigen)
      out.zeros += 2;
    else
      out.upper.push_back(z.imag() > 0 ? z : std::conj(z));
    ++i;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

AdjacencyMatrix::AdjacencyMatrix(Index n) : a_(n, n) {
  if (n < 0) throw std::invalid_argument("negative node count");
}

AdjacencyMatrix AdjacencyMatrix::from_edges(Index n, const std::vector<std::pair<int, int>>& edges) {
  AdjacencyMatrix out(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      std::ostringstream os;
      os << "edge (" << i << "," << j << ") outside node range [0," << n << ")";
      throw DataError(os.str());
    }
    trip.emplace_back(i, j, 1.0);
  }
  out.a_.setFromTriplets(trip.begin(), trip.end(), [](double, double) { return 1.0; });
  out.a_.makeCompressed();
  return out;
}

AdjacencyMatrix AdjacencyMatrix::from_dense(const Matrix& a) {
  if (a.rows() != a.cols()) throw DataError("adjacency matrix must be square");
  AdjacencyMatrix out(a.rows());
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double v = a(i, j);
      if (v == 1.0)
        trip.emplace_back(i, j, 1.0);
      else if (v != 0.0)
        throw DataError("adjacency entries must be 0 or 1");
    }
  }
  out.a_.setFromTriplets(trip.begin(), trip.end());
  out.a_.makeCompressed();
  return out;
}

bool AdjacencyMatrix::has_self_loops() const {
  for (Index i = 0; i < a_.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(a_, i); it; ++it)
      if (it.col() == i && it.value() != 0.0) return true;
  return false;
}

std::vector<std::pair<int, int>> AdjacencyMatrix::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(a_.nonZeros()));
  for (Index i = 0; i < a_.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(a_, i); it; ++it)
      if (it.value() != 0.0) out.emplace_back(static_cast<int>(i), static_cast<int>(it.col()));
  return out;
}

std::vector<int> AdjacencyMatrix::out_degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(size()), 0);
  for (Index i = 0; i < a_.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(a_, i); it; ++it)
      if (it.value() != 0.0) ++deg[static_cast<std::size_t>(i)];
  return deg;
}

// ---------------------------------------------------------------------------

std::vector<std::complex<double>> Spectrum::all() const {
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (double r : real) out.emplace_back(r, 0.0);
  for (const auto& z : upper) {
    out.push_back(z);
    out.push_back(std::conj(z));
  }
  out.insert(out.end(), static_cast<std::size_t>(zeros), std::complex<double>(0.0, 0.0));
  return out;
}

double Spectrum::max_modulus() const {
  double m = 0.0;
  for (double r : real) m = std::max(m, std::abs(r));
  for (const auto& z : upper) m = std::max(m, std::abs(z));
  return m;
}

double Spectrum::log_det(double rho) const {
  if (rho == 0.0) return 0.0;
  // Products over blocks of 16 stay far from under/overflow for any
  // row-stochastic spectrum; a block outside the safe range is redone term
  // by term, which also catches vanishing factors.
  constexpr std::size_t kBlock = 16;
  double total = 0.0;
  const std::size_t nr = real.size();
  for (std::size_t b = 0; b < nr; b += kBlock) {
    const std::size_t e = std::min(nr, b + kBlock);
    double prod = 1.0;
    for (std::size_t i = b; i < e; ++i) prod *= std::abs(1.0 - rho * real[i]);
    if (prod > 1e-280 && prod < 1e280) {
      total += std::log(prod);
      continue;
    }
    LogAccumulator acc;
    for (std::size_t i = b; i < e; ++i) {
      const double m = std::abs(1.0 - rho * real[i]);
      if (m < 1e-300) vanishing_factor(rho);
      acc.add(m);
    }
    total += acc.value();
  }
  // each conjugate pair contributes |1 - rho z|^2
  const std::size_t nc = upper.size();
  for (std::size_t b = 0; b < nc; b += kBlock) {
    const std::size_t e = std::min(nc, b + kBlock);
    double prod = 1.0;
    for (std::size_t i = b; i < e; ++i) {
      const double u = 1.0 - rho * upper[i].real();
      const double v = rho * upper[i].imag();
      prod *= u * u + v * v;
    }
    if (prod > 1e-280 && prod < 1e280) {
      total += std::log(prod);
      continue;
    }
    LogAccumulator acc;
    for (std::size_t i = b; i < e; ++i) {
      const double m = std::hypot(1.0 - rho * upper[i].real(), rho * upper[i].imag());
      if (m < 1e-300) vanishing_factor(rho);
      acc.add(m);
    }
    total += 2.0 * acc.value();
  }
  if (!std::isfinite(total)) vanishing_factor(rho);
  return total;
}

double Spectrum::trace_g(double rho) const {
  double t = 0.0;
  for (double l : real) t += l / (1.0 - rho * l);
  for (const auto& z : upper) t += 2.0 * (z / (1.0 - rho * z)).real();
  return t;
}

double Spectrum::trace_g2(double rho) const {
  double t = 0.0;
  for (double l : real) {
    const double g = l / (1.0 - rho * l);
    t += g * g;
  }
  for (const auto& z : upper) {
    const std::complex<double> g = z / (1.0 - rho * z);
    t += 2.0 * (g * g).real();
  }
  return t;
}

Spectrum compute_spectrum(const SparseMatrix& w) {
  if (w.rows() != w.cols()) throw std::invalid_argument("spectrum needs a square matrix");
  const Index n = w.rows();
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  Graph g(static_cast<std::size_t>(n));
  for (Index i = 0; i < w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w, i); it; ++it)
      if (it.value() != 0.0 && it.col() != i)
        boost::add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(it.col()), g);

  std::vector<int> comp(static_cast<std::size_t>(n));
  const int ncomp = n > 0 ? boost::strong_components(g, comp.data()) : 0;
  std::vector<std::vector<int>> members(static_cast<std::size_t>(ncomp));
  for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(comp[i])].push_back(static_cast<int>(i));

  Spectrum out;
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (const auto& nodes : members) {
    const Index m = static_cast<Index>(nodes.size());
    if (m == 1) {
      const double d = w.coeff(nodes[0], nodes[0]);
      if (std::abs(d) < kZeroEigen)
        ++out.zeros;
      else
        out.real.push_back(d);
      continue;
    }
    for (Index k = 0; k < m; ++k) local[nodes[k]] = static_cast<int>(k);
    Matrix block = Matrix::Zero(m, m);
    for (Index k = 0; k < m; ++k)
      for (SparseMatrix::InnerIterator it(w, nodes[k]); it; ++it) {
        const int c = local[it.col()];
        if (c >= 0 && comp[it.col()] == comp[nodes[k]]) block(k, c) = it.value();
      }
    Eigen::VectorXcd ev;
    Matrix work = block;
    if (m < kLapackMin || !detail::lapack_eigenvalues(work, ev)) {
      Eigen::EigenSolver<Matrix> es(block, false);
      if (es.info() != Eigen::Success) throw EstimationError("eigenvalue computation did not converge");
      ev = es.eigenvalues();
    }
    append_eigenvalues(ev, out);
    for (int v : nodes) local[v] = -1;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SpatialWeights::State {
  SparseMatrix w;
  SparseMatrix wt;
  std::vector<int> degrees;
  Index spectral_limit = kDefaultSpectralLimit;
  std::uint64_t fingerprint = 0;
  mutable std::once_flag once;
  mutable std::shared_ptr<const Spectrum> spectrum;
  mutable std::once_flag powers_once;
  mutable std::shared_ptr<const Matrix> powers;
};

Index SpatialWeights::size() const { return state_ ? state_->w.rows() : 0; }

const SparseMatrix& SpatialWeights::matrix() const {
  if (!state_) throw std::logic_error("empty spatial weights");
  return state_->w;
}

const SparseMatrix& SpatialWeights::transposed() const {
  if (!state_) throw std::logic_error("empty spatial weights");
  return state_->wt;
}

const std::vector<int>& SpatialWeights::degrees() const {
  if (!state_) throw std::logic_error("empty spatial weights");
  return state_->degrees;
}

std::uint64_t SpatialWeights::fingerprint() const { return state_ ? state_->fingerprint : 0; }

Vector SpatialWeights::multiply(const Eigen::Ref<const Vector>& v) const {
  check_dim(size(), v.size());
  return matrix() * v;
}

Vector SpatialWeights::multiply_transpose(const Eigen::Ref<const Vector>& v) const {
  check_dim(size(), v.size());
  return transposed() * v;
}

Index SpatialWeights::spectral_limit() const {
  return state_ ? state_->spectral_limit : kDefaultSpectralLimit;
}

bool SpatialWeights::uses_spectrum() const {
  return state_ && state_->w.rows() <= state_->spectral_limit;
}

std::shared_ptr<const Spectrum> SpatialWeights::spectrum() const {
  if (!uses_spectrum()) return nullptr;
  const State& s = *state_;
  std::call_once(s.once, [&s] {
    auto cached = spectrum_cache().find(s.fingerprint);
    if (cached && cached->size() == s.w.rows()) {
      s.spectrum = std::move(cached);
      return;
    }
    auto spec = std::make_shared<Spectrum>(compute_spectrum(s.w));
    if (spec->max_modulus() > 1.0 + kSpectralSlack)
      throw EstimationError("weight matrix has an eigenvalue outside the unit disc");
    spectrum_cache().insert(s.fingerprint, spec);
    s.spectrum = std::move(spec);
  });
  return s.spectrum;
}

std::shared_ptr<const Matrix> SpatialWeights::power_diagonals() const {
  if (!uses_spectrum()) return nullptr;
  const State& s = *state_;
  std::call_once(s.powers_once, [&s] {
    const Index n = s.w.rows();
    auto out = std::make_shared<Matrix>(n, kPowerTerms);
    Matrix p = Matrix(s.w);
    for (int m = 0; m < kPowerTerms; ++m) {
      out->col(m) = p.diagonal();
      if (m + 1 < kPowerTerms) p = s.w * p;
    }
    s.powers = std::move(out);
  });
  return s.powers;
}

double SpatialWeights::norm_1() const {
  Vector col = Vector::Zero(size());
  const SparseMatrix& w = matrix();
  for (Index i = 0; i < w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w, i); it; ++it) col(it.col()) += std::abs(it.value());
  return size() == 0 ? 0.0 : col.maxCoeff();
}

double SpatialWeights::norm_inf() const {
  const SparseMatrix& w = matrix();
  double best = 0.0;
  for (Index i = 0; i < w.outerSize(); ++i) {
    double r = 0.0;
    for (SparseMatrix::InnerIterator it(w, i); it; ++it) r += std::abs(it.value());
    best = std::max(best, r);
  }
  return best;
}

SpatialWeights make_weights(SparseMatrix w, std::vector<int> degrees, Index spectral_limit) {
  const Index n = w.rows();
  if (w.cols() != n) throw DataError("spatial weight matrix must be square");
  if (static_cast<Index>(degrees.size()) != n) throw std::invalid_argument("one degree per node is required");
  for (Index i = 0; i < w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w, i); it; ++it) {
      if (!std::isfinite(it.value()) || it.value() < 0.0) throw DataError("spatial weights must be finite and nonnegative");
      if (it.col() == i && it.value() != 0.0) throw DataError("spatial weight matrix has a nonzero diagonal");
    }
  auto state = std::make_shared<SpatialWeights::State>();
  w.prune(0.0);
  w.makeCompressed();
  state->w = std::move(w);
  state->wt = SparseMatrix(state->w.transpose());
  state->wt.makeCompressed();
  state->degrees = std::move(degrees);
  state->spectral_limit = spectral_limit;

  std::uint64_t h = 1469598103934665603ull;
  const std::int64_t dims = n;
  h = fnv1a(h, &dims, sizeof dims);
  h = fnv1a(h, state->w.outerIndexPtr(), sizeof(SparseMatrix::StorageIndex) * static_cast<std::size_t>(n + 1));
  h = fnv1a(h, state->w.innerIndexPtr(),
            sizeof(SparseMatrix::StorageIndex) * static_cast<std::size_t>(state->w.nonZeros()));
  h = fnv1a(h, state->w.valuePtr(), sizeof(double) * static_cast<std::size_t>(state->w.nonZeros()));
  state->fingerprint = h;

  SpatialWeights out;
  out.state_ = std::move(state);
  return out;
}

SpatialWeights row_normalize(const AdjacencyMatrix& adj, Index spectral_limit) {
  if (adj.has_self_loops()) throw DataError("adjacency matrix has a nonzero diagonal");
  std::vector<int> degrees = adj.out_degrees();
  SparseMatrix w = adj.pattern();
  for (Index i = 0; i < w.outerSize(); ++i) {
    const int deg = degrees[static_cast<std::size_t>(i)];
    for (SparseMatrix::InnerIterator it(w, i); it; ++it) {
      if (it.value() != 1.0) throw DataError("adjacency entries must be 0 or 1");
      it.valueRef() = 1.0 / deg;
    }
  }
  return make_weights(std::move(w), std::move(degrees), spectral_limit);
}

AdjacencyMatrix adjacency_of(const SpatialWeights& w) {
  std::vector<std::pair<int, int>> edges;
  const SparseMatrix& m = w.matrix();
  for (Index i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it)
      if (it.value() > 0.0) edges.emplace_back(static_cast<int>(i), static_cast<int>(it.col()));
  return AdjacencyMatrix::from_edges(w.size(), edges);
}

SpatialWeights induced_weights(const SpatialWeights& w, const std::vector<int>& nodes) {
  const Index n = w.size();
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int v = nodes[k];
    if (v < 0 || v >= n) throw std::invalid_argument("induced subnetwork node out of range");
    if (local[v] >= 0) throw std::invalid_argument("induced subnetwork node listed twice");
    local[v] = static_cast<int>(k);
  }
  std::vector<std::pair<int, int>> edges;
  const SparseMatrix& m = w.matrix();
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (SparseMatrix::InnerIterator it(m, nodes[k]); it; ++it) {
      const int c = local[it.col()];
      if (c >= 0 && it.value() > 0.0) edges.emplace_back(static_cast<int>(k), c);
    }
  return row_normalize(AdjacencyMatrix::from_edges(static_cast<Index>(nodes.size()), edges),
                       w.spectral_limit());
}

SpatialWeights restricted_weights(const SpatialWeights& w, const std::vector<int>& nodes) {
  const Index n = w.size();
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int v = nodes[k];
    if (v < 0 || v >= n) throw std::invalid_argument("restricted subnetwork node out of range");
    if (local[v] >= 0) throw std::invalid_argument("restricted subnetwork node listed twice");
    local[v] = static_cast<int>(k);
  }
  const Index m = static_cast<Index>(nodes.size());
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> degrees(nodes.size(), 0);
  const SparseMatrix& mat = w.matrix();
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (SparseMatrix::InnerIterator it(mat, nodes[k]); it; ++it) {
      const int c = local[it.col()];
      if (c < 0 || it.value() == 0.0) continue;
      trip.emplace_back(static_cast<int>(k), c, it.value());
      ++degrees[k];
    }
  SparseMatrix sub(m, m);
  sub.setFromTriplets(trip.begin(), trip.end());
  return make_weights(std::move(sub), std::move(degrees), w.spectral_limit());
}

// ---------------------------------------------------------------------------

double log_det_s(const SpatialWeights& w, double rho) {
  check_rho(rho);
  if (rho == 0.0) return 0.0;
  if (auto spec = w.spectrum()) return spec->log_det(rho);
  using ColSparse = Eigen::SparseMatrix<double>;
  ColSparse s(w.size(), w.size());
  s.setIdentity();
  s -= rho * ColSparse(w.matrix());
  Eigen::SparseLU<ColSparse> lu;
  lu.compute(s);
  if (lu.info() != Eigen::Success) throw EstimationError("sparse LU of I - rho W failed");
  const double v = lu.logAbsDeterminant();
  if (!std::isfinite(v)) vanishing_factor(rho);
  return v;
}

Vector apply_s(const SpatialWeights& w, double rho, const Eigen::Ref<const Vector>& v) {
  check_dim(w.size(), v.size());
  if (rho == 0.0) return v;
  return v - rho * (w.matrix() * v);
}

Vector solve_s(const SpatialWeights& w, double rho, const Eigen::Ref<const Vector>& v) {
  return SarTransform(w, rho).solve(v);
}

Vector solve_s_transpose(const SpatialWeights& w, double rho, const Eigen::Ref<const Vector>& v) {
  return SarTransform(w, rho).solve_transpose(v);
}

namespace {

Vector krylov_solve(const SparseMatrix& s, const Eigen::Ref<const Vector>& v) {
  const double vn = v.norm();
  if (vn == 0.0) return Vector::Zero(v.size());
  Eigen::BiCGSTAB<SparseMatrix> solver;
  solver.setTolerance(1e-13);
  solver.setMaxIterations(2000);
  solver.compute(s);
  Vector u = solver.solve(v);
  if (solver.info() == Eigen::Success && u.allFinite() && (s * u - v).norm() <= 1e-10 * vn) return u;

  using ColSparse = Eigen::SparseMatrix<double>;
  ColSparse cs(s);
  Eigen::SparseLU<ColSparse> lu;
  lu.compute(cs);
  if (lu.info() != Eigen::Success) throw EstimationError("I - rho W is singular");
  u = lu.solve(v);
  if (!u.allFinite() || (s * u - v).norm() > 1e-10 * vn)
    throw EstimationError("linear solve with I - rho W did not reach tolerance");
  return u;
}

}  // namespace

SarTransform::SarTransform(const SpatialWeights& w, double rho) : w_(&w), rho_(rho) {
  check_rho(rho);
  const Index n = w.size();
  s_.resize(n, n);
  s_.setIdentity();
  s_ -= rho * w.matrix();
  s_.makeCompressed();
  st_ = SparseMatrix(s_.transpose());
  st_.makeCompressed();
}

double SarTransform::log_det() const { return log_det_s(*w_, rho_); }

Vector SarTransform::apply(const Eigen::Ref<const Vector>& v) const { return apply_s(*w_, rho_, v); }

Vector SarTransform::solve(const Eigen::Ref<const Vector>& v) const {
  check_dim(w_->size(), v.size());
  if (rho_ == 0.0) return v;
  return krylov_solve(s_, v);
}

Vector SarTransform::solve_transpose(const Eigen::Ref<const Vector>& v) const {
  check_dim(w_->size(), v.size());
  if (rho_ == 0.0) return v;
  return krylov_solve(st_, v);
}

Vector SarTransform::g(const Eigen::Ref<const Vector>& v) const { return w_->matrix() * solve(v); }

Vector SarTransform::g_transpose(const Eigen::Ref<const Vector>& v) const {
  return solve_transpose(w_->transposed() * v);
}

std::pair<double, double> inverse_norms(const SpatialWeights& w, double rho) {
  SarTransform s(w, rho);
  const Index n = w.size();
  Vector row_sums = Vector::Zero(n);
  double col_max = 0.0;
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    const Vector col = s.solve(e);
    e(j) = 0.0;
    col_max = std::max(col_max, col.cwiseAbs().sum());
    row_sums += col.cwiseAbs();
  }
  return {col_max, n == 0 ? 0.0 : row_sums.maxCoeff()};
}

// ---------------------------------------------------------------------------

LogDet::LogDet(const SpatialWeights& w) : w_(w), spectrum_(w.spectrum()) {}

double LogDet::operator()(double rho) const {
  if (spectrum_) {
    check_rho(rho);
    return spectrum_->log_det(rho);
  }
  return log_det_s(w_, rho);
}

const std::vector<double>& LogDet::on_grid(const std::vector<double>& grid) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = grid_cache_.find(grid);
    if (it != grid_cache_.end()) return it->second;
  }
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = (*this)(grid[k]);
  std::lock_guard<std::mutex> lock(mutex_);
  return grid_cache_.emplace(grid, std::move(values)).first->second;
}

void set_spectrum_cache_capacity(std::size_t bytes) { spectrum_cache().set_capacity(bytes); }

std::size_t spectrum_cache_entries() { return spectrum_cache().entries(); }

}  // namespace fsar
