#include "fsar/harness.hpp"

#include "fsar/parallel.hpp"
#include "fsar/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace fsar {

namespace {

constexpr double kZ975 = 1.959963984540054;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void fill_errors(const std::vector<double>& est, const Vector& truth, double& max_err, double& sum_err) {
  max_err = 0.0;
  sum_err = 0.0;
  for (std::size_t j = 0; j < est.size(); ++j) {
    const double e = std::abs(est[j] - truth(static_cast<Index>(j)));
    max_err = std::max(max_err, e);
    sum_err += e;
  }
}

ReplicateResult run_replicate(const ExperimentSpec& spec, const GroundTruth& truth, int r, int inner) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  ReplicateResult out;
  DgpConfig cfg = spec.dgp;
  cfg.seed = spec.seed_base + static_cast<std::uint64_t>(r);
  out.seed = cfg.seed;
  const StageSet& st = spec.pipeline.stages;
  const std::size_t p = static_cast<std::size_t>(cfg.p);
  try {
    const SimulatedData sim = simulate(cfg, truth);
    std::vector<double> rho(p);
    for (std::size_t j = 0; j < p; ++j) rho[j] = truth.rho(static_cast<Index>(j));

    if (spec.oracle_stub) {
      if (st.cmle) out.rho_c = rho;
      if (st.fmle) {
        out.rho_f = rho;
        out.se_f.assign(p, 0.0);
      }
      if (st.scad) {
        out.has_supports = true;
        out.all_exact = true;
        out.exact_components = static_cast<int>(p);
      }
      if (st.factor) out.selected_factors = static_cast<int>(cfg.d);
    } else {
      PipelineConfig pc = spec.pipeline;
      pc.seed = cfg.seed;
      pc.workers = inner;
      pc.d_max = spec.d_max < 0 ? cfg.d + 2 : spec.d_max;
      const PipelineResult res = fit_pipeline(sim.Y, sim.X, sim.W, pc, &truth.supports);
      if (st.scad) {
        out.has_supports = true;
        for (std::size_t j = 0; j < p; ++j) out.exact_components += res.supports[j] == truth.supports[j];
        out.all_exact = out.exact_components == static_cast<int>(p);
      }
      for (const auto& c : res.cmle) {
        out.rho_c.push_back(c.rho_hat);
        out.boundary_hits += c.boundary_hit;
      }
      if (res.has_factors) {
        const Matrix z = select_rows(sim.Z, res.estimation_nodes);
        out.factor_error = factor_error(res.factors.Zhat, z, alignment_from_loadings(res.projection.M, truth.B));
        out.selected_factors = res.selected_factors;
      }
      for (const auto& f : res.fmle) {
        out.rho_f.push_back(f.rho_hat);
        out.se_f.push_back(f.has_covariance ? f.se_rho : kNaN);
        out.se_disagreements += f.se_disagreement;
      }
    }
    if (!out.rho_c.empty()) fill_errors(out.rho_c, truth.rho, out.max_err_c, out.sum_err_c);
    if (!out.rho_f.empty()) {
      fill_errors(out.rho_f, truth.rho, out.max_err_f, out.sum_err_f);
      out.covered.resize(p);
      for (std::size_t j = 0; j < p; ++j)
        out.covered[j] = std::abs(out.rho_f[j] - rho[j]) <= kZ975 * out.se_f[j];
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out = ReplicateResult{};
    out.seed = cfg.seed;
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  dgp.validate();
  pipeline.stages.validate();
  if (pipeline.stages.scad && dgp.q < 1) throw std::invalid_argument("scad stage needs covariates");
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void aggregate(MetricsReport& rep) {
  const ExperimentSpec& spec = rep.spec;
  const StageSet& st = spec.pipeline.stages;
  const std::size_t p = static_cast<std::size_t>(spec.dgp.p);
  std::vector<const ReplicateResult*> ok;
  for (const auto& r : rep.replicates)
    if (r.ok) ok.push_back(&r);
  rep.failures = static_cast<int>(rep.replicates.size() - ok.size());
  rep.failure_rate = rep.replicates.empty() ? 0.0 : rep.failures / static_cast<double>(rep.replicates.size());
  rep.failed = rep.failure_rate > 0.02 || ok.empty();
  rep.has_scad = st.scad;
  rep.has_cmle = st.cmle;
  rep.has_factor = st.factor;
  rep.has_fmle = st.fmle;
  if (ok.empty()) return;
  const double denom = static_cast<double>(ok.size() * p);

  rep.merr_c = rep.merr_f = 0.0;
  for (const auto* r : ok) {
    rep.merr_c += r->sum_err_c;
    rep.merr_f += r->sum_err_f;
  }
  rep.merr_c /= denom;
  rep.merr_f /= denom;
  rep.rim = st.fmle && rep.merr_c > 0.0 ? (1.0 - rep.merr_f / rep.merr_c) * 100.0 : kNaN;

  if (st.fmle) {
    rep.cp.assign(p, 0.0);
    rep.se_ratio.assign(p, kNaN);
    bool all_zero = true;
    for (std::size_t j = 0; j < p; ++j) {
      double mean_rho = 0.0, mean_se = 0.0;
      for (const auto* r : ok) {
        rep.cp[j] += r->covered[j];
        mean_rho += r->rho_f[j];
        mean_se += r->se_f[j];
        all_zero = all_zero && r->se_f[j] == 0.0;
      }
      rep.cp[j] *= 100.0 / static_cast<double>(ok.size());
      mean_rho /= static_cast<double>(ok.size());
      mean_se /= static_cast<double>(ok.size());
      if (ok.size() >= 2) {
        double ss = 0.0;
        for (const auto* r : ok) ss += (r->rho_f[j] - mean_rho) * (r->rho_f[j] - mean_rho);
        const double sd = std::sqrt(ss / static_cast<double>(ok.size() - 1));
        rep.se_ratio[j] = sd > 0.0 ? mean_se / sd : kNaN;
      }
    }
    rep.cp_degenerate = all_zero;
    rep.cp_min = *std::min_element(rep.cp.begin(), rep.cp.end());
    rep.cp_max = *std::max_element(rep.cp.begin(), rep.cp.end());
    rep.cp_median = quantile(rep.cp, 0.5);
    auto eng = rng::make_engine(spec.seed_base, rng::Stream::pick);
    rep.cp_pick_index = rng::uniform_int(eng, 0, static_cast<int>(p) - 1);
    rep.cp_pick = rep.cp[static_cast<std::size_t>(rep.cp_pick_index)];
  }
  if (st.scad) {
    int exact = 0;
    for (const auto* r : ok) exact += r->all_exact;
    rep.cm = 100.0 * exact / static_cast<double>(ok.size());
  }
  if (st.factor) {
    std::vector<double> fe;
    for (const auto* r : ok) fe.push_back(r->factor_error);
    rep.median_factor_error = quantile(fe, 0.5);
  }
}

MetricsReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const GroundTruth truth = draw_truth(spec.dgp);
  MetricsReport rep;
  rep.spec = spec;
  rep.replicates.resize(static_cast<std::size_t>(spec.replications));
  const int outer = std::min(spec.workers, spec.replications);
  const int inner = std::max(1, spec.workers / outer);
  parallel_for(rep.replicates.size(), outer, [&](std::size_t r) {
    rep.replicates[r] = run_replicate(spec, truth, static_cast<int>(r), inner);
  });
  aggregate(rep);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<BoxplotRow> summarize_boxplot_data(const std::vector<MetricsReport>& reports) {
  using Key = std::tuple<std::string, Index, Index, std::string>;
  std::map<Key, std::vector<double>> cells;
  for (const auto& rep : reports) {
    const DgpConfig& d = rep.spec.dgp;
    const std::string net = to_string(d.network);
    for (const auto& r : rep.replicates) {
      if (!r.ok) continue;
      if (rep.has_cmle) cells[{net, d.n, d.p, "cmle"}].push_back(std::log(r.max_err_c));
      if (rep.has_fmle) cells[{net, d.n, d.p, "fmle"}].push_back(std::log(r.max_err_f));
    }
  }
  std::vector<BoxplotRow> out;
  for (const auto& [key, v] : cells) {
    BoxplotRow row;
    std::tie(row.network, row.n, row.p, row.estimator) = key;
    row.count = static_cast<int>(v.size());
    row.min = quantile(v, 0.0);
    row.q1 = quantile(v, 0.25);
    row.median = quantile(v, 0.5);
    row.q3 = quantile(v, 0.75);
    row.max = quantile(v, 1.0);
    out.push_back(row);
  }
  return out;
}

}  // namespace fsar
