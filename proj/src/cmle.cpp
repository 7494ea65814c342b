#include "fsar/cmle.hpp"

#include "fsar/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fsar {

double cmle_loglik(double rho, const Vector& beta, double sigma, const Vector& y, const Matrix& x,
                   const SpatialWeights& w) {
  return sar_loglik(rho, beta, sigma, y, x, w);
}

Profile profile_beta_sigma(double rho, const Vector& y, const Matrix& x, const SpatialWeights& w) {
  if (x.rows() != y.size()) throw std::invalid_argument("X and y have different row counts");
  const Design design(x);
  const Vector sy = apply_s(w, rho, y);
  Profile p;
  p.beta = design.coef(sy);
  const Vector e = x.cols() > 0 ? Vector(sy - x * p.beta) : sy;
  p.sigma = e.squaredNorm() / static_cast<double>(y.size());
  return p;
}

ConcentratedProfile::ConcentratedProfile(const Vector& y, const Vector& wy, const Design& design,
                                         double sigma_floor)
    : n_(static_cast<double>(y.size())), floor_(sigma_floor) {
  const Vector e0 = design.residual(y);
  const Vector e1 = design.residual(wy);
  e00_ = e0.squaredNorm();
  e01_ = e0.dot(e1);
  e11_ = e1.squaredNorm();
}

double ConcentratedProfile::rss(double rho) const { return e00_ - 2.0 * rho * e01_ + rho * rho * e11_; }

double ConcentratedProfile::value(double rho, double logdet) const {
  const double sigma = std::max(rss(rho) / n_, floor_);
  return -0.5 * n_ * std::log(sigma) + logdet;
}

ComponentEstimate fit_component(const Vector& y, const Matrix& x, const SpatialWeights& w, const CmleOptions& opts,
                                const LogDet* logdet) {
  const Index n = y.size();
  if (w.size() != n) throw std::invalid_argument("weights and response have different sizes");
  if (x.rows() != n) throw std::invalid_argument("X and y have different row counts");
  if (n <= x.cols() + 2) throw DataError("too few observations for the number of covariates");
  if (!y.allFinite() || !x.allFinite()) throw DataError("non-finite values in response or covariates");

  const Design design(x);
  const Vector wy = w.multiply(y);
  const ConcentratedProfile prof(y, wy, design, opts.sigma_floor);
  std::unique_ptr<LogDet> own;
  if (!logdet) {
    own = std::make_unique<LogDet>(w);
    logdet = own.get();
  }
  const RhoSearchResult r =
      maximize_over_rho([&prof](double rho, double ld) { return prof.value(rho, ld); }, *logdet, opts.search);
  if (!std::isfinite(r.value)) throw EstimationError("concentrated likelihood is not finite on the rho grid");

  ComponentEstimate est;
  est.rho_hat = r.rho;
  est.beta_hat = design.coef(y - r.rho * wy);
  est.sigma_hat = std::max(prof.rss(r.rho) / static_cast<double>(n), opts.sigma_floor);
  est.loglik = r.value - 0.5 * static_cast<double>(n);
  est.iterations = r.iterations;
  est.converged = r.converged;
  est.boundary_hit = r.boundary_hit;
  est.jittered = design.jittered();
  return est;
}

std::vector<ComponentEstimate> fit_components(const Matrix& y, const Matrix& x,
                                              const std::vector<std::vector<int>>& supports,
                                              const SpatialWeights& w, const CmleOptions& opts, int workers) {
  const std::size_t p = static_cast<std::size_t>(y.cols());
  if (supports.size() != p) throw std::invalid_argument("one support per response column is required");
  const LogDet logdet(w);
  std::vector<ComponentEstimate> out(p);
  parallel_for(p, workers, [&](std::size_t j) {
    try {
      out[j] = fit_component(y.col(static_cast<Index>(j)), select_columns(x, supports[j]), w, opts, &logdet);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "component " << j << ": " << e.what();
      throw EstimationError(os.str());
    }
    out[j].support = supports[j];
  });
  return out;
}

Matrix residuals(const std::vector<ComponentEstimate>& est, const Matrix& y, const Matrix& x,
                 const SpatialWeights& w) {
  if (static_cast<Index>(est.size()) != y.cols()) throw std::invalid_argument("one estimate per column is required");
  Matrix e(y.rows(), y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    const ComponentEstimate& c = est[static_cast<std::size_t>(j)];
    e.col(j) = apply_s(w, c.rho_hat, y.col(j));
    if (!c.support.empty()) e.col(j) -= select_columns(x, c.support) * c.beta_hat;
  }
  return e;
}

CmleCovariance cmle_covariance(const ComponentEstimate& est, const Vector& y, const Matrix& x,
                               const SpatialWeights& w, const TraceOptions& traces) {
  const SarTransform s(w, est.rho_hat);
  const GStatistics gs = g_statistics(s, traces);
  Vector e = s.apply(y);
  if (x.cols() > 0) e -= x * est.beta_hat;
  const SarBlocks b = sar_blocks(s, gs, x, est.beta_hat, est.sigma_hat, e);
  CmleCovariance out;
  out.information = b.sigma2;
  out.delta = b.delta;
  out.covariance = sandwich(b.sigma2, b.sigma2 + b.delta, y.size());
  out.se_rho = std::sqrt(std::max(out.covariance(0, 0), 0.0));
  return out;
}

}  // namespace fsar
