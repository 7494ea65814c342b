// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Tolerances are fixed here; nothing is scaled down.
//
//   fsar_acceptance [--only C1,C6] [--workers N]

#include "support.hpp"

#include "fsar/cmle.hpp"
#include "fsar/dgp.hpp"
#include "fsar/fmle.hpp"
#include "fsar/harness.hpp"
#include "fsar/netgen.hpp"
#include "fsar/scad.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace fsar;
using fsar::testing::Gen;

namespace {

using Clock = std::chrono::steady_clock;

int g_workers = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

MetricsReport run(ExperimentSpec spec, const std::string& label) {
  spec.workers = g_workers;
  const auto t0 = Clock::now();
  MetricsReport m = run_experiment(spec);
  std::fprintf(stderr, "  %-34s %7.1f s  failures %d\n", label.c_str(), seconds_since(t0), m.failures);
  return m;
}

ExperimentSpec cell(NetworkModel net, Index n, Index p, int reps, const std::string& stages, std::uint64_t seed_base) {
  ExperimentSpec s;
  s.dgp.network = net;
  s.dgp.n = n;
  s.dgp.p = p;
  s.dgp.q = 20;
  s.dgp.d = 3;
  s.dgp.truth_seed = seed_base;
  s.replications = reps;
  s.seed_base = seed_base * 100000;
  s.pipeline.stages = StageSet::parse(stages);
  return s;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v, const char* f) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " > " : "") + fmt(f, v[k]);
  return s;
}

const NetworkModel kNetworks[] = {NetworkModel::dim, NetworkModel::sbm, NetworkModel::lsm};

// reference cell, DIM n=500 p=50
Outcome c1() {
  const MetricsReport m = run(cell(NetworkModel::dim, 500, 50, 100, "cmle,factor,fmle", 11), "DIM n=500 p=50");
  const bool ok = !m.failed && std::abs(m.merr_f - 0.018) <= 0.006 && std::abs(m.rim - 41.58) <= 12.0 &&
                  m.cp_pick >= 92.0 && m.cp_pick <= 98.0;
  std::ostringstream os;
  os << "MErr_f " << fmt("%.4f", m.merr_f) << " (0.018 +- 0.006), RIM " << fmt("%.2f", m.rim)
     << " (41.58 +- 12), CP_j " << fmt("%.1f", m.cp_pick) << " for j=" << m.cp_pick_index << " in [92, 98]"
     << "; CP min/median/max " << fmt("%.0f", m.cp_min) << "/" << fmt("%.1f", m.cp_median) << "/"
     << fmt("%.0f", m.cp_max);
  return {ok, os.str()};
}

// reference cell, SBM n=1000 p=100
Outcome c2() {
  const MetricsReport m = run(cell(NetworkModel::sbm, 1000, 100, 100, "cmle,factor,fmle", 12), "SBM n=1000 p=100");
  const bool ok = !m.failed && std::abs(m.merr_f - 0.014) <= 0.005 && std::abs(m.rim - 42.85) <= 12.0;
  std::ostringstream os;
  os << "MErr_f " << fmt("%.4f", m.merr_f) << " (0.014 +- 0.005), RIM " << fmt("%.2f", m.rim) << " (42.85 +- 12)";
  return {ok, os.str()};
}

// MaxErr_c decay in n, p=100
Outcome c3() {
  bool ok = true;
  std::ostringstream os;
  for (NetworkModel net : kNetworks) {
    std::vector<double> med;
    for (Index n : {500, 1000, 1500}) {
      const MetricsReport m =
          run(cell(net, n, 100, 100, "cmle", 30 + static_cast<std::uint64_t>(net)), to_string(net) + " cmle n=" + std::to_string(n));
      std::vector<double> logs;
      for (const auto& r : m.replicates)
        if (r.ok) logs.push_back(std::log(r.max_err_c));
      ok = ok && !m.failed;
      med.push_back(quantile(logs, 0.5));
    }
    ok = ok && strictly_decreasing(med);
    os << to_string(net) << " " << join(med, "%.3f") << "; ";
  }
  return {ok, "median log MaxErr_c over n=500,1000,1500: " + os.str()};
}

// CM in n, q=20 d=3 p=50
Outcome c4() {
  bool ok = true;
  std::ostringstream os;
  for (NetworkModel net : kNetworks) {
    std::vector<double> cm, per;
    for (Index n : {500, 1000, 1500}) {
      const MetricsReport m =
          run(cell(net, n, 50, 100, "scad", 40 + static_cast<std::uint64_t>(net)), to_string(net) + " scad n=" + std::to_string(n));
      double exact = 0.0, total = 0.0;
      for (const auto& r : m.replicates)
        if (r.ok) {
          exact += r.exact_components;
          total += 50.0;
        }
      ok = ok && !m.failed;
      cm.push_back(m.cm);
      per.push_back(total > 0 ? 100.0 * exact / total : 0.0);
    }
    ok = ok && cm[1] >= cm[0] && cm[2] >= cm[1] && cm[2] >= 90.0;
    os << to_string(net) << " " << fmt("%.0f", cm[0]) << "/" << fmt("%.0f", cm[1]) << "/" << fmt("%.0f", cm[2])
       << "% (components exact " << fmt("%.1f", per[0]) << "/" << fmt("%.1f", per[1]) << "/" << fmt("%.1f", per[2])
       << "%); ";
  }
  return {ok, "CM over n=500,1000,1500, need nondecreasing and >= 90 at 1500: " + os.str()};
}

// factor recovery along (n, p)
Outcome c5() {
  std::vector<double> med;
  bool ok = true;
  const std::pair<Index, Index> path[] = {{500, 50}, {1000, 100}, {1500, 200}};
  for (const auto& [n, p] : path) {
    const MetricsReport m = run(cell(NetworkModel::dim, n, p, 100, "cmle,factor", 50),
                                "DIM factor n=" + std::to_string(n) + " p=" + std::to_string(p));
    ok = ok && !m.failed;
    med.push_back(m.median_factor_error);
  }
  ok = ok && strictly_decreasing(med);
  return {ok, "median ||Zhat - Z H'||_F/sqrt(n): " + join(med, "%.4f")};
}

// --- oracle suite ---------------------------------------------------------

struct Part {
  bool pass;
  std::string detail;
};

Part oracle_logdet() {
  Gen g(601);
  double worst = 0.0;
  int cases = 0;
  for (Index n : {20, 100, 250, 500})
    for (int k = 0; k < 4; ++k) {
      AdjacencyMatrix a;
      const std::uint64_t seed = g.engine()();
      switch (k) {
        case 0: a = generate_dim(n, seed); break;
        case 1: a = generate_sbm(n, 5, seed); break;
        case 2: a = generate_lsm(n, seed); break;
        default: a = g.adjacency(n, 4.0);
      }
      const SpatialWeights w = row_normalize(a);
      for (double rho : {-0.95, -0.5, 0.0, 0.3, 0.7, 0.95}) {
        worst = std::max(worst, std::abs(log_det_s(w, rho) - testing::dense_logdet_lu(w, rho)));
        ++cases;
      }
    }
  return {worst <= 1e-8, "(a) log-det max gap " + fmt("%.1e", worst) + " over " + std::to_string(cases) + " cases"};
}

double concentrated(double rho, const Vector& y, const Matrix& x, const SpatialWeights& w) {
  const Profile pr = profile_beta_sigma(rho, y, x, w);
  return cmle_loglik(rho, pr.beta, pr.sigma, y, x, w);
}

struct Instance {
  SpatialWeights w;
  Matrix x;
  Vector y;
};

Instance sar_instance(Gen& g, Index n) {
  Instance in;
  in.w = g.weights(n, 4.0);
  in.x = g.matrix(n, 2);
  Vector beta(2);
  beta << g.uniform(0.5, 1.0), -g.uniform(0.5, 1.0);
  const double rho = g.uniform(-0.8, 0.8);
  in.y = solve_s(in.w, rho, in.x * beta + 0.5 * g.vector(n));
  return in;
}

Part oracle_grid() {
  Gen g(602);
  const double step = 1.98 / 200.0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Instance in = sar_instance(g, 100);
    const ComponentEstimate e = fit_component(in.y, in.x, in.w);
    double best = -std::numeric_limits<double>::infinity(), arg = 0.0;
    for (int k = 0; k <= 200; ++k) {
      const double rho = -0.99 + k * step;
      const double v = concentrated(rho, in.y, in.x, in.w);
      if (v > best) best = v, arg = rho;
    }
    worst = std::max(worst, std::abs(e.rho_hat - arg));
  }
  return {worst <= step, "(b) argmax vs 201-point grid max gap " + fmt("%.4f", worst) + " (step " + fmt("%.4f", step) + ")"};
}

Part oracle_stationarity() {
  Gen g(603);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Instance in = sar_instance(g, 200);
    const ComponentEstimate e = fit_component(in.y, in.x, in.w);
    const double n = static_cast<double>(in.y.size());
    auto f = [&](const Vector& b, double s) { return cmle_loglik(e.rho_hat, b, s, in.y, in.x, in.w) / n; };
    const double h = 1e-5;
    for (Index k = 0; k < e.beta_hat.size(); ++k) {
      Vector bp = e.beta_hat, bm = e.beta_hat;
      bp(k) += h;
      bm(k) -= h;
      worst = std::max(worst, std::abs(f(bp, e.sigma_hat) - f(bm, e.sigma_hat)) / (2 * h));
    }
    worst = std::max(worst, std::abs(f(e.beta_hat, e.sigma_hat + h) - f(e.beta_hat, e.sigma_hat - h)) / (2 * h));
  }
  return {worst <= 1e-4, "(c) profiled score max " + fmt("%.1e", worst)};
}

Part oracle_hessian() {
  DgpConfig cfg;
  cfg.n = 3000;
  cfg.p = 3;
  cfg.q = 5;
  cfg.d = 2;
  cfg.seed = 7;
  cfg.truth_seed = 7;
  const SimulatedData s = simulate(cfg);
  const Matrix xj = select_columns(s.X, s.truth.supports[0]);
  const Vector y = s.Y.col(0);
  AugmentedEstimate e = fit_fmle(y, xj, s.Z, s.W);
  sandwich_covariance(e, y, xj, s.Z, s.W, nullptr);
  const Index k = xj.cols(), d = s.Z.cols(), g = e.dim();
  Vector th(g);
  th << e.rho_hat, e.beta_hat, e.btilde_hat, e.tau_hat;
  auto ll = [&](const Vector& v) {
    return loglik_fmle(v(0), v.segment(1, k), v.segment(1 + k, d), v(1 + k + d), y, xj, s.Z, s.W);
  };
  Matrix h(g, g);
  for (Index a = 0; a < g; ++a)
    for (Index b = a; b < g; ++b) {
      const double ha = 1e-4 * std::max(1.0, std::abs(th(a))), hb = 1e-4 * std::max(1.0, std::abs(th(b)));
      Vector pp = th, pm = th, mp = th, mm = th;
      pp(a) += ha, pp(b) += hb;
      pm(a) += ha, pm(b) -= hb;
      mp(a) -= ha, mp(b) += hb;
      mm(a) -= ha, mm(b) -= hb;
      h(a, b) = h(b, a) = -(ll(pp) - ll(pm) - ll(mp) + ll(mm)) / (4 * ha * hb) / static_cast<double>(cfg.n);
    }
  const Matrix& s2 = e.blocks.sigma2;
  double worst = 0.0, diag = 0.0;
  for (Index a = 0; a < g; ++a) {
    diag = std::max(diag, std::abs(s2(a, a) - h(a, a)) / std::abs(h(a, a)));
    for (Index b = 0; b < g; ++b) worst = std::max(worst, std::abs(s2(a, b) - h(a, b)) / std::sqrt(h(a, a) * h(b, b)));
  }
  return {worst <= 0.02,
          "(d) Sigma2 vs Hessian max scaled gap " + fmt("%.4f", worst) + " (diagonal relative " + fmt("%.4f", diag) + ")"};
}

// independent evaluation in long double, straight from the formulas
long double ref_scad(long double t, long double lam, long double a) {
  if (t <= lam) return lam;
  const long double plus = a * lam - t > 0 ? a * lam - t : 0;
  return lam * plus / ((a - 1) * lam);
}

long double ref_bic_penalty(long double s, long double n, long double p, long double q, long double alpha) {
  return s * std::log(n) * std::pow(std::log(p * q), 2 / alpha) / n;
}

Part oracle_formulas() {
  Gen g(605);
  long double worst = 0;
  for (int t = 0; t < 10000; ++t) {
    const double lam = g.uniform(1e-3, 3.0), a = g.uniform(2.01, 8.0), x = g.uniform(0.0, 1.2 * a * lam);
    worst = std::max(worst, std::abs(static_cast<long double>(scad_derivative(x, lam, a)) - ref_scad(x, lam, a)));
    const int s = g.integer(0, 30), n = g.integer(50, 5000), p = g.integer(1, 300), q = g.integer(1, 100);
    const double alpha = g.uniform(0.2, 2.0);
    ScadRecord r;
    r.loglik = g.uniform(-1e4, 0.0);
    r.support.resize(static_cast<std::size_t>(s));
    const long double want = -static_cast<long double>(r.loglik) / n + ref_bic_penalty(s, n, p, q, alpha);
    // relative once the value exceeds one: (log pq)^(2/alpha) reaches 1e10 for small alpha
    worst = std::max(worst, std::abs(static_cast<long double>(bic(r, n, p, q, alpha)) - want) /
                                std::max(1.0L, std::abs(want)));
  }
  return {worst <= 1e-12L, "(e) SCAD/BIC formula max relative gap " + fmt("%.1e", static_cast<double>(worst))};
}

Outcome c6() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& part : {oracle_logdet, oracle_grid, oracle_stationarity, oracle_hessian, oracle_formulas}) {
    const Part r = part();
    ok = ok && r.pass;
    detail += r.detail + (r.pass ? "" : " [fail]") + "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs <= 300.0;
  std::fprintf(stderr, "  %-34s %7.1f s\n", "oracle suite", secs);
  return {ok, detail + "runtime " + fmt("%.1f", secs) + " s (<= 300)"};
}

// SE calibration, DIM n=1000 p=100 R=500
Outcome c7() {
  const MetricsReport m = run(cell(NetworkModel::dim, 1000, 100, 500, "cmle,factor,fmle", 70), "DIM n=1000 p=100 R=500");
  int within = 0;
  double lo = INFINITY, hi = -INFINITY;
  double se_sum = 0.0, sd_sum = 0.0;
  const std::size_t p = m.se_ratio.size();
  for (std::size_t j = 0; j < p; ++j) {
    const double r = m.se_ratio[j];
    within += r >= 0.85 && r <= 1.15;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    double mean = 0.0, se = 0.0, cnt = 0.0;
    for (const auto& rep : m.replicates)
      if (rep.ok) mean += rep.rho_f[j], se += rep.se_f[j], cnt += 1.0;
    mean /= cnt;
    double ss = 0.0;
    for (const auto& rep : m.replicates)
      if (rep.ok) ss += (rep.rho_f[j] - mean) * (rep.rho_f[j] - mean);
    se_sum += se / cnt;
    sd_sum += std::sqrt(ss / (cnt - 1.0));
  }
  const double aggregate = se_sum / sd_sum;
  const bool ok = !m.failed && within == static_cast<int>(p);
  std::ostringstream os;
  os << "per component mean SE / MC SD in [0.85, 1.15]: " << within << "/" << p << " (range " << fmt("%.3f", lo) << ".."
     << fmt("%.3f", hi) << "); averaged over components " << fmt("%.3f", aggregate) << "; CP median "
     << fmt("%.1f", m.cp_median);
  return {ok, os.str()};
}

// null selection, n=1500 q=20
Outcome c8() {
  ExperimentSpec s = cell(NetworkModel::dim, 1500, 50, 100, "scad", 80);
  s.dgp.sparsity = 0;
  const MetricsReport m = run(s, "DIM null scad n=1500");
  double empty = 0.0, total = 0.0;
  for (const auto& r : m.replicates)
    if (r.ok) {
      empty += r.exact_components;  // the true support is empty
      total += static_cast<double>(s.dgp.p);
    }
  const double share = total > 0 ? 100.0 * empty / total : 0.0;
  return {!m.failed && share >= 95.0, "empty support in " + fmt("%.2f", share) + "% of components (>= 95)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FSAR acceptance suite"};
  std::string only;
  g_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--only", only, "comma-separated criteria, e.g. C1,C6");
  app.add_option("--workers", g_workers, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> wanted;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) wanted.insert(tok);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"C1", c1}, {"C2", c2}, {"C3", c3}, {"C4", c4}, {"C5", c5}, {"C6", c6}, {"C7", c7}, {"C8", c8}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(name)) continue;
    std::fprintf(stderr, "%s\n", name.c_str());
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
