#include "fsar/pipeline.hpp"

#include "fsar/parallel.hpp"

#include <boost/algorithm/string.hpp>

#include <chrono>
#include <cmath>
#include <sstream>

namespace fsar {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(std::string("stage ") + stage + ": " + e.what());
  } catch (const EstimationError& e) {
    throw EstimationError(std::string("stage ") + stage + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw EstimationError(std::string("stage ") + stage + ": " + e.what());
  }
}

}  // namespace

void StageSet::validate() const {
  const bool on[4] = {scad, cmle, factor, fmle};
  int first = -1, last = -1;
  for (int i = 0; i < 4; ++i)
    if (on[i]) {
      if (first < 0) first = i;
      last = i;
    }
  if (first < 0) throw std::invalid_argument("no pipeline stage selected");
  for (int i = first; i <= last; ++i)
    if (!on[i]) throw std::invalid_argument("pipeline stages must be contiguous in the order scad, cmle, factor, fmle");
  if (first >= 2) throw std::invalid_argument("factor and fmle stages need the cmle stage");
}

std::string StageSet::to_string() const {
  std::vector<std::string> parts;
  if (scad) parts.emplace_back("scad");
  if (cmle) parts.emplace_back("cmle");
  if (factor) parts.emplace_back("factor");
  if (fmle) parts.emplace_back("fmle");
  return boost::algorithm::join(parts, ",");
}

StageSet StageSet::parse(const std::string& list) {
  StageSet s{false, false, false, false};
  std::vector<std::string> parts;
  boost::algorithm::split(parts, list, boost::is_any_of(", "), boost::token_compress_on);
  for (auto& p : parts) {
    boost::algorithm::to_lower(p);
    if (p.empty()) continue;
    if (p == "scad")
      s.scad = true;
    else if (p == "cmle")
      s.cmle = true;
    else if (p == "factor")
      s.factor = true;
    else if (p == "fmle")
      s.fmle = true;
    else
      throw std::invalid_argument("unknown pipeline stage '" + p + "'");
  }
  s.validate();
  return s;
}

void PipelineConfig::validate() const {
  stages.validate();
  if (stages.scad) scad.validate();
  if (d_max < 0) throw std::invalid_argument("d_max must be nonnegative");
  if (factor_cap < 1) throw std::invalid_argument("factor cap must be positive");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw std::invalid_argument("holdout fraction must lie in (0, 1)");
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  if (projection == ProjectionKind::user_supplied && stages.factor && user_m.size() == 0)
    throw std::invalid_argument("user-supplied projection requires a matrix");
}

PipelineResult fit_pipeline(const Matrix& y, const Matrix& x, const SpatialWeights& w, const PipelineConfig& cfg,
                            const std::vector<std::vector<int>>* supports) {
  cfg.validate();
  const Index n = y.rows();
  const Index p = y.cols();
  const Index q = x.cols();
  if (n < 1 || p < 1) throw DataError("response matrix is empty");
  if (w.size() != n) throw DataError("spatial weights and response have different node counts");
  if (q > 0 && x.rows() != n) throw DataError("X and Y have different row counts");
  if (!y.allFinite() || !x.allFinite()) throw DataError("non-finite values in Y or X");

  PipelineResult out;
  out.stages = cfg.stages;

  auto t0 = Clock::now();
  if (cfg.stages.scad && q > 0) {
    out.paths = in_stage("scad", [&] { return select_supports(y, x, w, cfg.scad, cfg.workers); });
    for (const auto& path : out.paths) {
      out.supports.push_back(path.selected_support);
      if (path.failures > 0) out.warnings.push_back("scad: some lambda fits failed and were skipped");
    }
    out.seconds["scad"] = since(t0);
  } else if (supports) {
    if (static_cast<Index>(supports->size()) != p) throw std::invalid_argument("one support per response is required");
    for (const auto& s : *supports)
      for (int k : s)
        if (k < 0 || k >= q) throw std::invalid_argument("support index out of range");
    out.supports = *supports;
  } else {
    std::vector<int> all(static_cast<std::size_t>(q));
    for (Index k = 0; k < q; ++k) all[static_cast<std::size_t>(k)] = static_cast<int>(k);
    out.supports.assign(static_cast<std::size_t>(p), all);
  }
  if (!cfg.stages.cmle) return out;

  // The random partition sets the estimation sample before any fit.
  const bool split = cfg.stages.factor && cfg.projection == ProjectionKind::random_partition;
  SpatialWeights we = w;
  Matrix ye, xe;
  if (split) {
    t0 = Clock::now();
    out.projection = in_stage("factor", [&] {
      const Index nh = static_cast<Index>(std::floor(cfg.holdout_fraction * static_cast<double>(n)));
      const Index cap = std::min<Index>({p - 1, static_cast<Index>(cfg.factor_cap), nh - 5});
      const Index d = cfg.d_max > 0 ? cfg.d_max : std::max<Index>(cap, 1);
      // auto mode keeps the cap here and truncates after the main-part fit
      return build_projection_random_partition(y, x, out.supports, w, d, cfg.holdout_fraction, cfg.seed, cfg.cmle,
                                               cfg.workers);
    });
    out.seconds["projection"] = since(t0);
    out.estimation_nodes = out.projection.main;
    we = restricted_weights(w, out.estimation_nodes);
    ye = select_rows(y, out.estimation_nodes);
    xe = q > 0 ? select_rows(x, out.estimation_nodes) : Matrix(static_cast<Index>(out.estimation_nodes.size()), 0);
  } else {
    out.estimation_nodes.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.estimation_nodes[static_cast<std::size_t>(i)] = static_cast<int>(i);
    ye = y;
    xe = q > 0 ? x : Matrix(n, 0);
  }

  t0 = Clock::now();
  out.cmle = in_stage("cmle", [&] { return fit_components(ye, xe, out.supports, we, cfg.cmle, cfg.workers); });
  if (cfg.cmle_covariance) {
    out.cmle_se.resize(static_cast<std::size_t>(p));
    in_stage("cmle", [&] {
      parallel_for(static_cast<std::size_t>(p), cfg.workers, [&](std::size_t j) {
        try {
          const auto& c = out.cmle[j];
          out.cmle_se[j] =
              cmle_covariance(c, ye.col(static_cast<Index>(j)), select_columns(xe, c.support), we, cfg.cmle.traces)
                  .se_rho;
        } catch (const std::exception& e) {
          std::ostringstream os;
          os << "component " << j << ": " << e.what();
          throw EstimationError(os.str());
        }
      });
      return 0;
    });
  }
  for (std::size_t j = 0; j < out.cmle.size(); ++j) {
    if (out.cmle[j].boundary_hit) out.warnings.push_back("cmle: component " + std::to_string(j) + " rho at the boundary");
    if (out.cmle[j].jittered) out.warnings.push_back("cmle: component " + std::to_string(j) + " design was jittered");
  }
  out.seconds["cmle"] = since(t0);
  if (!cfg.stages.factor) return out;

  t0 = Clock::now();
  in_stage("factor", [&] {
    const Matrix e = residuals(out.cmle, ye, xe, we);
    if (split && cfg.d_max == 0) {
      // holdout residuals also carry the smoothed factors of dropped
      // main-part neighbours, so the count comes from main-part residuals
      const int d = select_num_factors(residual_eigenvalues(e), static_cast<int>(out.projection.d_max));
      out.projection = truncate_projection(out.projection, std::max(d, 1));
    }
    if (!split) {
      Index d = cfg.d_max;
      if (d == 0) {
        const Vector ev = residual_eigenvalues(e);
        d = std::max(select_num_factors(ev, cfg.factor_cap), 1);
      }
      if (cfg.projection == ProjectionKind::hadamard)
        out.projection = build_projection_hadamard(p, d, cfg.seed);
      else {
        if (cfg.user_m.rows() != p) throw DataError("user projection must have one row per response");
        out.projection = user_projection(cfg.user_m);
      }
    }
    out.factors = estimate_factors(e, out.projection);
    out.selected_factors = select_num_factors(out.factors.eigenvalues, cfg.factor_cap);
    out.loadings = loading_diagnostic(out.factors.eigenvalues, p);
    return 0;
  });
  out.has_factors = true;
  if (out.loadings.weak) out.warnings.push_back("factor: no dominant eigenvalue ratio; factor count is low-confidence");
  out.seconds["factor"] = since(t0);
  if (!cfg.stages.fmle) return out;

  t0 = Clock::now();
  out.fmle = in_stage("fmle", [&] {
    return fit_fmle_all(ye, xe, out.supports, out.factors.Zhat, we, out.cmle, out.projection.M, cfg.fmle, cfg.workers,
                        cfg.fmle_covariance);
  });
  for (std::size_t j = 0; j < out.fmle.size(); ++j) {
    if (out.fmle[j].boundary_hit) out.warnings.push_back("fmle: component " + std::to_string(j) + " rho at the boundary");
    if (out.fmle[j].se_disagreement)
      out.warnings.push_back("fmle: component " + std::to_string(j) + " analytic and numeric SE differ by over 10%");
  }
  out.seconds["fmle"] = since(t0);
  return out;
}

Diagnostics diagnose_residuals(const Matrix& e, const SpatialWeights& w) {
  if (e.rows() != w.size()) throw DataError("residuals and weights have different node counts");
  Diagnostics d;
  const Vector ev = residual_eigenvalues(e);
  const Index top = std::min<Index>(ev.size(), 30);
  d.eigenvalues = ev.head(top);
  d.ratios = eigenvalue_ratios(d.eigenvalues);
  d.selected_factors = ev.size() > 1 ? select_num_factors(ev) : 0;
  d.loadings = loading_diagnostic(ev, e.cols());
  d.norm_1 = w.norm_1();
  d.norm_inf = w.norm_inf();
  return d;
}

Diagnostics diagnose(const Matrix& y, const Matrix& x, const SpatialWeights& w,
                     const std::vector<std::vector<int>>* supports, const CmleOptions& cmle, int workers) {
  PipelineConfig cfg;
  cfg.stages = StageSet{false, true, false, false};
  cfg.cmle = cmle;
  cfg.workers = workers;
  const PipelineResult res = fit_pipeline(y, x, w, cfg, supports);
  Diagnostics d = diagnose_residuals(residuals(res.cmle, y, x.cols() > 0 ? x : Matrix(y.rows(), 0), w), w);
  for (const auto& c : res.cmle) {
    d.rho.push_back(c.rho_hat);
    d.boundary_hit.push_back(c.boundary_hit);
  }
  return d;
}

}  // namespace fsar
