#include "fsar/scad.hpp"

#include "fsar/parallel.hpp"

#include <cmath>
#include <sstream>

namespace fsar {

void ScadConfig::validate() const {
  if (!(a > 2.0)) throw std::invalid_argument("SCAD constant a must exceed 2");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (0, 2]");
  if (lambda_grid.empty() && (n_lambda < 1 || !(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)))
    throw std::invalid_argument("invalid lambda grid settings");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] > 0.0)) throw std::invalid_argument("lambda grid must be strictly positive");
    if (k > 0 && !(lambda_grid[k] < lambda_grid[k - 1]))
      throw std::invalid_argument("lambda grid must be strictly descending");
  }
}

double scad_derivative(double t, double lambda, double a) {
  if (t < 0.0) throw std::invalid_argument("SCAD derivative needs t >= 0");
  if (t <= lambda) return lambda;
  return std::max(a * lambda - t, 0.0) / (a - 1.0);
}

double scad_penalty(double t, double lambda, double a) {
  t = std::abs(t);
  if (t <= lambda) return lambda * t;
  if (t <= a * lambda) return -(t * t - 2.0 * a * lambda * t + lambda * lambda) / (2.0 * (a - 1.0));
  return (a + 1.0) * lambda * lambda / 2.0;
}

double bic_penalty(Index support_size, Index n, Index p, Index q, double alpha) {
  const double nn = static_cast<double>(n);
  return static_cast<double>(support_size) * std::log(nn) *
         std::pow(std::log(static_cast<double>(p) * static_cast<double>(q)), 2.0 / alpha) / nn;
}

double bic(const ScadRecord& rec, Index n, Index p, Index q, double alpha) {
  return -rec.loglik / static_cast<double>(n) +
         bic_penalty(static_cast<Index>(rec.support.size()), n, p, q, alpha);
}

// ---------------------------------------------------------------------------

ScadProblem::ScadProblem(const Vector& y, const Matrix& x, const SpatialWeights& w, const LogDet& logdet)
    : n_(y.size()), q_(x.cols()), logdet_(&logdet) {
  if (x.rows() != n_ || w.size() != n_) throw std::invalid_argument("SCAD inputs have inconsistent sizes");
  if (!y.allFinite() || !x.allFinite()) throw DataError("non-finite values in response or covariates");
  const Vector wy = w.multiply(y);
  gram_ = x.transpose() * x;
  xy_ = x.transpose() * y;
  xwy_ = x.transpose() * wy;
  yy_ = y.squaredNorm();
  ywy_ = y.dot(wy);
  wywy_ = wy.squaredNorm();
}

double ScadProblem::rss(double rho, const Vector& beta) const {
  double r = yy_ - 2.0 * rho * ywy_ + rho * rho * wywy_;
  if (q_ > 0) r += beta.dot(gram_ * beta) - 2.0 * beta.dot(xy_ - rho * xwy_);
  return std::max(r, 0.0);
}

double ScadProblem::loglik(double rho, const Vector& beta, double sigma) const {
  const double n = static_cast<double>(n_);
  return -0.5 * n * std::log(sigma) + (*logdet_)(rho) - rss(rho, beta) / (2.0 * sigma);
}

double ScadProblem::objective(double rho, const Vector& beta, double sigma, double lambda, double a) const {
  double pen = 0.0;
  for (Index k = 0; k < beta.size(); ++k) pen += scad_penalty(beta(k), lambda, a);
  return loglik(rho, beta, sigma) - static_cast<double>(n_) * pen;
}

RhoSearchResult ScadProblem::concentrate(const Vector& beta, const RhoSearchOptions& opts) const {
  double a = yy_;
  double b = ywy_;
  if (q_ > 0) {
    a += beta.dot(gram_ * beta) - 2.0 * beta.dot(xy_);
    b -= beta.dot(xwy_);
  }
  const double c = wywy_;
  const double n = static_cast<double>(n_);
  auto f = [=](double rho, double ld) {
    const double r = std::max((a - 2.0 * rho * b + rho * rho * c) / n, 1e-300);
    return -0.5 * n * std::log(r) + ld;
  };
  return maximize_over_rho(f, *logdet_, opts);
}

int ScadProblem::coordinate_descent(Vector& beta, double rho, double sigma, const Vector& weights, int max_sweeps,
                                    double tol) const {
  if (q_ == 0) return 0;
  const double n = static_cast<double>(n_);
  // minimize beta'G beta / 2 - c'beta + n sigma sum w_k |beta_k|
  Vector grad = xy_ - rho * xwy_ - gram_ * beta;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Index k = 0; k < q_; ++k) {
      const double gkk = gram_(k, k);
      const double z = grad(k) + gkk * beta(k);
      const double thr = n * sigma * weights(k);
      double nb = 0.0;
      if (z > thr)
        nb = (z - thr) / gkk;
      else if (z < -thr)
        nb = (z + thr) / gkk;
      const double d = nb - beta(k);
      if (d != 0.0) {
        grad -= gram_.col(k) * d;
        beta(k) = nb;
        change = std::max(change, std::abs(d) * std::sqrt(gkk));
      }
    }
    if (change <= tol * std::sqrt(n)) {
      ++sweep;
      break;
    }
  }
  return sweep;
}

ScadStart ScadProblem::unpenalized(const RhoSearchOptions& opts) const {
  ScadStart s;
  if (q_ == 0) return null_fit(opts);
  Eigen::LDLT<Matrix> ldlt(gram_);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-14 * ldlt.vectorD().maxCoeff()))
    throw DataError("singular covariate matrix in the unpenalized fit");
  const Vector by = ldlt.solve(xy_);
  const Vector bw = ldlt.solve(xwy_);
  const double e00 = yy_ - xy_.dot(by);
  const double e01 = ywy_ - xy_.dot(bw);
  const double e11 = wywy_ - xwy_.dot(bw);
  const double n = static_cast<double>(n_);
  auto f = [=](double rho, double ld) {
    const double r = std::max((e00 - 2.0 * rho * e01 + rho * rho * e11) / n, 1e-300);
    return -0.5 * n * std::log(r) + ld;
  };
  const RhoSearchResult r = maximize_over_rho(f, *logdet_, opts);
  s.rho = r.rho;
  s.beta = by - r.rho * bw;
  s.sigma = std::max(rss(s.rho, s.beta) / n, 1e-300);
  return s;
}

ScadStart ScadProblem::null_fit(const RhoSearchOptions& opts) const {
  ScadStart s;
  s.beta = Vector::Zero(q_);
  const RhoSearchResult r = concentrate(s.beta, opts);
  s.rho = r.rho;
  s.sigma = std::max(rss(s.rho, s.beta) / static_cast<double>(n_), 1e-300);
  return s;
}

double ScadProblem::lambda_max(const RhoSearchOptions& opts) const {
  if (q_ == 0) return 0.0;
  const ScadStart s = null_fit(opts);
  const Vector score = xy_ - s.rho * xwy_;
  return score.cwiseAbs().maxCoeff() / (static_cast<double>(n_) * s.sigma);
}

// ---------------------------------------------------------------------------

namespace {

ScadRecord run_lla(const ScadProblem& prob, double lambda, const ScadConfig& cfg, const Vector& weight_source,
                   const ScadStart& warm) {
  const Index q = prob.q();
  const double n = static_cast<double>(prob.n());
  Vector beta = warm.beta.size() == q ? warm.beta : Vector::Zero(q);
  double rho = warm.rho;
  double sigma = warm.sigma;
  Vector src = weight_source;
  Vector weights(q);
  ScadRecord rec;
  rec.lambda = lambda;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    for (Index k = 0; k < q; ++k) weights(k) = scad_derivative(std::abs(src(k)), lambda, cfg.a);
    const Vector beta_prev = beta;
    prob.coordinate_descent(beta, rho, sigma, weights, cfg.cd_max_sweeps, cfg.cd_tol);
    const RhoSearchResult r = prob.concentrate(beta, cfg.search);
    if (!std::isfinite(r.value)) throw EstimationError("concentrated likelihood is not finite");
    const double sigma_new = std::max(prob.rss(r.rho, beta) / n, 1e-300);
    double change = std::max(std::abs(r.rho - rho), std::abs(sigma_new - sigma));
    if (q > 0) change = std::max(change, (beta - beta_prev).cwiseAbs().maxCoeff());
    rho = r.rho;
    sigma = sigma_new;
    src = beta;
    if (change < cfg.tol) {
      rec.converged = true;
      ++it;
      break;
    }
  }
  rec.iterations = it;
  rec.rho_hat = rho;
  rec.beta_hat = beta;
  rec.sigma_hat = sigma;
  rec.loglik = prob.loglik(rho, beta, sigma);
  rec.objective = prob.objective(rho, beta, sigma, lambda, cfg.a);
  for (Index k = 0; k < q; ++k)
    if (beta(k) != 0.0) rec.support.push_back(static_cast<int>(k));
  return rec;
}

}  // namespace

ScadRecord fit_scad(const ScadProblem& prob, double lambda, const ScadConfig& cfg, const ScadStart& lla_init,
                    const ScadStart& warm) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const Index q = prob.q();
  const Vector init_beta = lla_init.beta.size() == q ? lla_init.beta : Vector::Zero(q);
  ScadRecord rec = run_lla(prob, lambda, cfg, init_beta, warm);
  // Majorizing at the warm start guarantees ascent from it.
  const Vector warm_beta = warm.beta.size() == q ? warm.beta : Vector::Zero(q);
  const double warm_obj = prob.objective(warm.rho, warm_beta, warm.sigma, lambda, cfg.a);
  if (rec.objective < warm_obj) {
    ScadRecord alt = run_lla(prob, lambda, cfg, warm_beta, warm);
    if (alt.objective >= rec.objective) rec = std::move(alt);
  }
  return rec;
}

ScadRecord fit_scad(const Vector& y, const Matrix& x, const SpatialWeights& w, double lambda,
                    const ScadConfig& cfg) {
  cfg.validate();
  const LogDet logdet(w);
  const ScadProblem prob(y, x, w, logdet);
  const ScadStart init = prob.unpenalized(cfg.search);
  return fit_scad(prob, lambda, cfg, init, init);
}

std::vector<double> lambda_path(double lambda_max, const ScadConfig& cfg) {
  if (!cfg.lambda_grid.empty()) return cfg.lambda_grid;
  const double top = lambda_max > 0.0 ? lambda_max : 1e-12;
  std::vector<double> g(static_cast<std::size_t>(cfg.n_lambda));
  if (cfg.n_lambda == 1) {
    g[0] = top;
    return g;
  }
  const double step = std::log(cfg.lambda_min_ratio) / (cfg.n_lambda - 1);
  for (int k = 0; k < cfg.n_lambda; ++k) g[k] = top * std::exp(step * k);
  return g;
}

ScadPath select_support(const Vector& y, const Matrix& x, const SpatialWeights& w, Index p, const ScadConfig& cfg,
                        const LogDet* logdet) {
  cfg.validate();
  std::unique_ptr<LogDet> own;
  if (!logdet) {
    own = std::make_unique<LogDet>(w);
    logdet = own.get();
  }
  const ScadProblem prob(y, x, w, *logdet);
  const Index n = y.size();
  const Index q = x.cols();
  ScadPath path;
  const ScadStart init = prob.unpenalized(cfg.search);
  ScadStart warm = prob.null_fit(cfg.search);
  // LLA weights come from the unpenalized start, so beta = 0 is only
  // guaranteed once lambda also covers every unpenalized coefficient
  double top = prob.lambda_max(cfg.search);
  if (init.beta.size() > 0) top = std::max(top, init.beta.cwiseAbs().maxCoeff());
  const std::vector<double> grid = lambda_path(top, cfg);

  for (double lambda : grid) {
    ScadRecord rec;
    try {
      rec = fit_scad(prob, lambda, cfg, init, warm);
      rec.bic = bic(rec, n, p, std::max<Index>(q, 1), cfg.alpha);
      warm.rho = rec.rho_hat;
      warm.beta = rec.beta_hat;
      warm.sigma = rec.sigma_hat;
    } catch (const EstimationError&) {
      rec = ScadRecord{};
      rec.lambda = lambda;
      rec.failed = true;
      ++path.failures;
    }
    path.records.push_back(std::move(rec));
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.records.size(); ++k) {
    const ScadRecord& r = path.records[k];
    if (!r.failed && r.bic < best) {
      best = r.bic;
      path.selected = static_cast<Index>(k);
    }
  }
  if (path.selected < 0) throw EstimationError("every lambda on the SCAD path failed");
  const ScadRecord& sel = path.records[static_cast<std::size_t>(path.selected)];
  path.selected_lambda = sel.lambda;
  path.selected_support = sel.support;

  std::size_t prev = 0;
  bool have_prev = false;
  for (const auto& r : path.records) {
    if (r.failed) continue;
    if (have_prev && r.support.size() < prev) ++path.monotonicity_violations;
    prev = r.support.size();
    have_prev = true;
  }
  return path;
}

std::vector<ScadPath> select_supports(const Matrix& y, const Matrix& x, const SpatialWeights& w,
                                      const ScadConfig& cfg, int workers) {
  const LogDet logdet(w);
  const std::size_t p = static_cast<std::size_t>(y.cols());
  std::vector<ScadPath> out(p);
  parallel_for(p, workers, [&](std::size_t j) {
    try {
      out[j] = select_support(y.col(static_cast<Index>(j)), x, w, y.cols(), cfg, &logdet);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "component " << j << ": " << e.what();
      throw EstimationError(os.str());
    }
  });
  return out;
}

}  // namespace fsar
