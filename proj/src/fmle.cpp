#include "fsar/fmle.hpp"

#include "fsar/parallel.hpp"

#include <cmath>
#include <sstream>

namespace fsar {

namespace {

std::vector<int> nonzero_columns(const Matrix& z) {
  std::vector<int> kept;
  for (Index c = 0; c < z.cols(); ++c)
    if (z.col(c).squaredNorm() > 0.0) kept.push_back(static_cast<int>(c));
  return kept;
}

Matrix augmented_design(const Matrix& x, const Matrix& zhat, const std::vector<int>& kept) {
  Matrix r(x.rows(), x.cols() + static_cast<Index>(kept.size()));
  r.leftCols(x.cols()) = x;
  for (std::size_t l = 0; l < kept.size(); ++l) r.col(x.cols() + static_cast<Index>(l)) = zhat.col(kept[l]);
  return r;
}

Vector effective_gamma(const AugmentedEstimate& est, const std::vector<int>& kept) {
  const Index s = est.beta_hat.size();
  Vector g(s + static_cast<Index>(kept.size()));
  g.head(s) = est.beta_hat;
  for (std::size_t l = 0; l < kept.size(); ++l) g(s + static_cast<Index>(l)) = est.btilde_hat(kept[l]);
  return g;
}

// Position of each effective parameter inside the full (rho, beta, btilde, tau).
std::vector<Index> full_positions(Index s, Index dmax, const std::vector<int>& kept) {
  std::vector<Index> pos;
  pos.push_back(0);
  for (Index k = 0; k < s; ++k) pos.push_back(1 + k);
  for (int l : kept) pos.push_back(1 + s + l);
  pos.push_back(1 + s + dmax);
  return pos;
}

Matrix embed(const Matrix& eff, const std::vector<Index>& pos, Index g) {
  Matrix full = Matrix::Zero(g, g);
  for (std::size_t a = 0; a < pos.size(); ++a)
    for (std::size_t b = 0; b < pos.size(); ++b)
      full(pos[a], pos[b]) = eff(static_cast<Index>(a), static_cast<Index>(b));
  return full;
}

// Analytic gradient of the SAR quasi-likelihood in (rho, gamma, tau).
Vector sar_gradient(const Vector& theta, const Vector& y, const Vector& wy, const Matrix& r,
                    const SpatialWeights& w, const Spectrum* spec) {
  const Index k = r.cols();
  const double rho = theta(0);
  const double tau = theta(k + 1);
  const double n = static_cast<double>(y.size());
  Vector e = y - rho * wy;
  if (k > 0) e -= r * theta.segment(1, k);
  double trg;
  if (spec) {
    trg = spec->trace_g(rho);
  } else {
    const double h = 1e-5;
    trg = -(log_det_s(w, rho + h) - log_det_s(w, rho - h)) / (2.0 * h);
  }
  Vector g(k + 2);
  g(0) = -trg + e.dot(wy) / tau;
  if (k > 0) g.segment(1, k) = r.transpose() * e / tau;
  g(k + 1) = -0.5 * n / tau + e.squaredNorm() / (2.0 * tau * tau);
  return g;
}

NumericSandwich numeric_core(double rho, const Vector& gamma, double tau, const Vector& y, const Matrix& r,
                             const SpatialWeights& w, const Matrix& sigma_q, const SarTransform& s,
                             const GStatistics& gs) {
  const Index k = r.cols();
  const Index dim = k + 2;
  const double n = static_cast<double>(y.size());
  Vector theta(dim);
  theta(0) = rho;
  theta.segment(1, k) = gamma;
  theta(k + 1) = tau;
  const Vector wy = w.multiply(y);
  auto spec = w.spectrum();

  Matrix jac(dim, dim);
  for (Index c = 0; c < dim; ++c) {
    const double h = 1e-5 * std::max(std::abs(theta(c)), c == dim - 1 ? 1e-3 : 1.0);
    Vector tp = theta;
    Vector tm = theta;
    tp(c) += h;
    tm(c) -= h;
    jac.col(c) = (sar_gradient(tp, y, wy, r, w, spec.get()) - sar_gradient(tm, y, wy, r, w, spec.get())) / (2 * h);
  }
  NumericSandwich out;
  out.hessian = -0.5 * (jac + jac.transpose()) / n;

  Vector e = s.apply(y);
  if (k > 0) e -= r * gamma;
  const Matrix psi = node_scores(s, gs, r, gamma, tau, e);
  out.opg = psi.transpose() * psi / n;
  out.covariance = sandwich(out.hessian, out.opg + sigma_q, y.size());
  out.se_rho = std::sqrt(std::max(out.covariance(0, 0), 0.0));
  return out;
}

}  // namespace

double loglik_fmle(double rho, const Vector& beta, const Vector& btilde, double tau, const Vector& y,
                   const Matrix& x, const Matrix& zhat, const SpatialWeights& w) {
  if (!(tau > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(y.size());
  Vector e = apply_s(w, rho, y);
  if (x.cols() > 0) e -= x * beta;
  if (zhat.cols() > 0) e -= zhat * btilde;
  return -0.5 * n * std::log(tau) + log_det_s(w, rho) - e.squaredNorm() / (2.0 * tau);
}

AugmentedEstimate fit_fmle(const Vector& y, const Matrix& x, const Matrix& zhat, const SpatialWeights& w,
                           const FmleOptions& opts, const LogDet* logdet) {
  if (zhat.rows() != y.size()) throw std::invalid_argument("Zhat and y have different row counts");
  const std::vector<int> kept = nonzero_columns(zhat);
  const Matrix r = augmented_design(x, zhat, kept);
  CmleOptions copts;
  copts.search = opts.search;
  copts.traces = opts.traces;
  copts.sigma_floor = opts.tau_floor;
  ComponentEstimate c;
  try {
    c = fit_component(y, r, w, copts, logdet);
  } catch (const DataError& e) {
    throw EstimationError(std::string("augmented design [X, Zhat]: ") + e.what());
  }
  AugmentedEstimate est;
  const Index s = x.cols();
  est.rho_hat = c.rho_hat;
  est.beta_hat = c.beta_hat.head(s);
  est.btilde_hat = Vector::Zero(zhat.cols());
  for (std::size_t l = 0; l < kept.size(); ++l) est.btilde_hat(kept[l]) = c.beta_hat(s + static_cast<Index>(l));
  est.tau_hat = c.sigma_hat;
  est.loglik = c.loglik;
  est.iterations = c.iterations;
  est.converged = c.converged;
  est.boundary_hit = c.boundary_hit;
  est.jittered = c.jittered;
  return est;
}

FactorErrorModel::FactorErrorModel(const Matrix& y, const Matrix& x, const SpatialWeights& w,
                                   const std::vector<ComponentEstimate>& cmle, const Matrix& m,
                                   const Matrix& fmle_residuals, const TraceOptions& traces, int workers)
    : m_(m) {
  const Index n = y.rows();
  const Index p = y.cols();
  if (static_cast<Index>(cmle.size()) != p || m.rows() != p || fmle_residuals.cols() != p)
    throw std::invalid_argument("factor error model needs one CMLE fit and one residual column per response");
  Index total = 0;
  for (const auto& c : cmle) {
    offset_.push_back(total);
    width_.push_back(1 + static_cast<Index>(c.support.size()));
    total += width_.back();
  }
  f_.resize(n, total);
  u_.resize(n, total);
  parallel_for(static_cast<std::size_t>(p), workers, [&](std::size_t k) {
    const ComponentEstimate& c = cmle[k];
    const Matrix xk = select_columns(x, c.support);
    const Vector yk = y.col(static_cast<Index>(k));
    const SarTransform s(w, c.rho_hat);
    const GStatistics gs = g_statistics(s, traces);
    Vector e = s.apply(yk);
    if (xk.cols() > 0) e -= xk * c.beta_hat;
    const SarBlocks b = sar_blocks(s, gs, xk, c.beta_hat, c.sigma_hat, e);
    const Matrix psi = node_scores(s, gs, xk, c.beta_hat, c.sigma_hat, e);
    // influence rows u_i = A^{-1} psi_i
    const Matrix infl = b.sigma2.fullPivLu().solve(psi.transpose()).transpose();
    const Index o = offset_[k];
    const Index wd = width_[k];
    f_.col(o) = w.multiply(yk);
    if (wd > 1) f_.block(0, o + 1, n, wd - 1) = xk;
    u_.block(0, o, n, wd) = infl.leftCols(wd);
  });
  omega_m_ = fmle_residuals * m / static_cast<double>(p);
}

Matrix FactorErrorModel::sigma_q(const Vector& wy, const Matrix& xj, const Matrix& zhat, const std::vector<int>& kept,
                                 const Vector& btilde, double tau, const Vector& resid) const {
  const Index n = wy.size();
  const Index p = m_.rows();
  const Index s = xj.cols();
  const Index dk = static_cast<Index>(kept.size());
  const Index g = s + dk + 2;

  Matrix mk(p, dk);
  Matrix vw(n, dk);
  Vector bk(dk);
  Matrix q(n, g);
  q.col(0) = wy;
  if (s > 0) q.block(0, 1, n, s) = xj;
  for (Index l = 0; l < dk; ++l) {
    mk.col(l) = m_.col(kept[l]);
    vw.col(l) = omega_m_.col(kept[l]);
    bk(l) = btilde(kept[l]);
    q.col(1 + s + l) = zhat.col(kept[l]);
  }
  q.col(g - 1) = resid / tau;
  q *= -1.0 / tau;
  const Vector er = resid / tau;

  // error of the CMLE inputs, averaged over components through M
  const Vector c = mk * bk;
  const Matrix qf = q.transpose() * f_ / static_cast<double>(n);
  const Vector h = f_.transpose() * er / static_cast<double>(n);
  Matrix v = Matrix::Zero(f_.cols(), g);
  for (Index k = 0; k < p; ++k) {
    const Index o = offset_[k];
    const Index wd = width_[k];
    v.block(o, 0, wd, g) = c(k) * qf.block(0, o, g, wd).transpose();
    if (dk > 0) v.block(o, 1 + s, wd, dk) += h.segment(o, wd) * mk.row(k);
  }
  Matrix t = -(u_ * v) / static_cast<double>(p);

  // projected idiosyncratic noise M' omega_i / p
  const Vector a = vw * bk;
  t += a.asDiagonal() * q;
  if (dk > 0) t.block(0, 1 + s, n, dk) += er.asDiagonal() * vw;
  return t.transpose() * t / static_cast<double>(n);
}

void sandwich_covariance(AugmentedEstimate& est, const Vector& y, const Matrix& x, const Matrix& zhat,
                         const SpatialWeights& w, const FactorErrorModel* model, const FmleOptions& opts) {
  const std::vector<int> kept = nonzero_columns(zhat);
  const Matrix r = augmented_design(x, zhat, kept);
  const Vector gamma = effective_gamma(est, kept);
  const SarTransform s(w, est.rho_hat);
  const GStatistics gs = g_statistics(s, opts.traces);
  Vector e = s.apply(y);
  if (r.cols() > 0) e -= r * gamma;

  const SarBlocks b = sar_blocks(s, gs, r, gamma, est.tau_hat, e);
  Matrix sq = Matrix::Zero(b.sigma2.rows(), b.sigma2.cols());
  if (model) sq = model->sigma_q(w.multiply(y), x, zhat, kept, est.btilde_hat, est.tau_hat, e);
  const Matrix cov = sandwich(b.sigma2, b.sigma2 + b.delta + sq, y.size());

  const Index g = est.dim();
  const auto pos = full_positions(x.cols(), zhat.cols(), kept);
  est.blocks.sigma2 = embed(b.sigma2, pos, g);
  est.blocks.delta = embed(b.delta, pos, g);
  est.blocks.sigma_q = embed(sq, pos, g);
  est.covariance = embed(cov, pos, g);
  est.se_rho = std::sqrt(std::max(cov(0, 0), 0.0));
  est.has_covariance = true;

  const NumericSandwich num = numeric_core(est.rho_hat, gamma, est.tau_hat, y, r, w, sq, s, gs);
  est.se_rho_numeric = num.se_rho;
  est.se_disagreement = !(std::abs(num.se_rho - est.se_rho) <= opts.disagreement_tol * est.se_rho);
}

NumericSandwich numeric_sandwich(const AugmentedEstimate& est, const Vector& y, const Matrix& x,
                                 const Matrix& zhat, const SpatialWeights& w, const Matrix& sigma_q,
                                 const TraceOptions& traces) {
  const std::vector<int> kept = nonzero_columns(zhat);
  const Matrix r = augmented_design(x, zhat, kept);
  const Vector gamma = effective_gamma(est, kept);
  const SarTransform s(w, est.rho_hat);
  const GStatistics gs = g_statistics(s, traces);
  const auto pos = full_positions(x.cols(), zhat.cols(), kept);
  Matrix sq(pos.size(), pos.size());
  for (std::size_t a = 0; a < pos.size(); ++a)
    for (std::size_t b = 0; b < pos.size(); ++b)
      sq(static_cast<Index>(a), static_cast<Index>(b)) =
          sigma_q.size() ? sigma_q(pos[a], pos[b]) : 0.0;
  NumericSandwich eff = numeric_core(est.rho_hat, gamma, est.tau_hat, y, r, w, sq, s, gs);
  const Index g = est.dim();
  eff.hessian = embed(eff.hessian, pos, g);
  eff.opg = embed(eff.opg, pos, g);
  eff.covariance = embed(eff.covariance, pos, g);
  return eff;
}

Matrix fmle_residuals(const std::vector<AugmentedEstimate>& est, const Matrix& y, const Matrix& x,
                      const Matrix& zhat, const SpatialWeights& w) {
  Matrix e(y.rows(), y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    const AugmentedEstimate& a = est[static_cast<std::size_t>(j)];
    e.col(j) = apply_s(w, a.rho_hat, y.col(j)) - zhat * a.btilde_hat;
    if (!a.support.empty()) e.col(j) -= select_columns(x, a.support) * a.beta_hat;
  }
  return e;
}

std::vector<AugmentedEstimate> fit_fmle_all(const Matrix& y, const Matrix& x,
                                            const std::vector<std::vector<int>>& supports, const Matrix& zhat,
                                            const SpatialWeights& w, const std::vector<ComponentEstimate>& cmle,
                                            const Matrix& m, const FmleOptions& opts, int workers,
                                            bool with_covariance) {
  const std::size_t p = static_cast<std::size_t>(y.cols());
  if (supports.size() != p) throw std::invalid_argument("one support per response column is required");
  const LogDet logdet(w);
  std::vector<AugmentedEstimate> est(p);
  auto guarded = [&](std::size_t j, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "component " << j << ": " << e.what();
      throw EstimationError(os.str());
    }
  };
  parallel_for(p, workers, [&](std::size_t j) {
    guarded(j, [&] {
      est[j] = fit_fmle(y.col(static_cast<Index>(j)), select_columns(x, supports[j]), zhat, w, opts, &logdet);
    });
    est[j].support = supports[j];
  });
  if (!with_covariance) return est;

  const Matrix omega = fmle_residuals(est, y, x, zhat, w);
  const FactorErrorModel model(y, x, w, cmle, m, omega, opts.traces, workers);
  parallel_for(p, workers, [&](std::size_t j) {
    guarded(j, [&] {
      sandwich_covariance(est[j], y.col(static_cast<Index>(j)), select_columns(x, supports[j]), zhat, w, &model,
                          opts);
    });
  });
  return est;
}

}  // namespace fsar
