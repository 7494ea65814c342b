// fsar: simulate, fit, experiment, diagnose.

#include "fsar/dgp.hpp"
#include "fsar/harness.hpp"
#include "fsar/io.hpp"
#include "fsar/output.hpp"
#include "fsar/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>

using namespace fsar;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kEstimation = 3 };

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct DgpFlags {
  DgpConfig cfg;
  std::string network = "dim";
  std::string noise = "gaussian";

  void add(CLI::App& app) {
    app.add_option("--n", cfg.n, "nodes")->check(CLI::PositiveNumber);
    app.add_option("--p", cfg.p, "responses")->check(CLI::PositiveNumber);
    app.add_option("--q", cfg.q, "covariates")->check(CLI::NonNegativeNumber);
    app.add_option("--d", cfg.d, "latent factors")->check(CLI::NonNegativeNumber);
    app.add_option("--network", network, "dim | sbm | lsm");
    app.add_option("--sbm-blocks", cfg.sbm_blocks, "SBM block count");
    app.add_option("--truth-seed", cfg.truth_seed, "seed of rho, beta, B, tau");
    app.add_option("--sparsity", cfg.sparsity, "nonzero betas per response (-1: default for q)");
    app.add_option("--noise", noise, "gaussian | sub_weibull");
    app.add_option("--weibull-shape", cfg.weibull_shape, "sub-Weibull tail order");
  }
  DgpConfig resolve() {
    cfg.network = parse_network_model(network);
    if (noise == "gaussian")
      cfg.noise = NoiseKind::gaussian;
    else if (noise == "sub_weibull")
      cfg.noise = NoiseKind::sub_weibull;
    else
      throw std::invalid_argument("unknown noise '" + noise + "'");
    cfg.validate();
    return cfg;
  }
};

struct PipelineFlags {
  std::string stages = "scad,cmle,factor,fmle";
  std::string projection = "random_partition";
  Index d_max = 0;
  double holdout = 0.10;
  double alpha = 2.0;
  int n_lambda = 50;
  bool cmle_se = false;

  void add(CLI::App& app, bool with_d_max = true) {
    app.add_option("--stages", stages, "comma list from scad,cmle,factor,fmle");
    app.add_option("--projection", projection, "random_partition | hadamard");
    if (with_d_max) app.add_option("--d-max", d_max, "working factor count (0: eigenvalue-ratio choice)");
    app.add_option("--holdout", holdout, "holdout fraction of the random partition");
    app.add_option("--alpha", alpha, "sub-Weibull order in the BIC penalty");
    app.add_option("--n-lambda", n_lambda, "lambda grid size");
    app.add_flag("--cmle-se", cmle_se, "sandwich SE for the CMLE as well");
  }
  PipelineConfig resolve() const {
    PipelineConfig c;
    c.stages = StageSet::parse(stages);
    if (projection == "random_partition")
      c.projection = ProjectionKind::random_partition;
    else if (projection == "hadamard")
      c.projection = ProjectionKind::hadamard;
    else
      throw std::invalid_argument("unknown projection '" + projection + "'");
    c.d_max = d_max;
    c.holdout_fraction = holdout;
    c.scad.alpha = alpha;
    c.scad.n_lambda = n_lambda;
    c.cmle_covariance = cmle_se;
    return c;
  }
  json to_json() const {
    return {{"stages", stages}, {"projection", projection}, {"d_max", d_max}, {"holdout_fraction", holdout},
            {"bic_alpha", alpha}, {"n_lambda", n_lambda}, {"lambda_min_ratio", 1e-3}, {"scad_a", 3.7},
            {"cmle_se", cmle_se}};
  }
};

struct InputFlags {
  IngestPaths paths;
  bool log_transform = false;
  bool standardize = false;
  bool standardize_x = false;

  void add(CLI::App& app) {
    app.add_option("--y", paths.y, "response CSV (header row)")->required()->check(CLI::ExistingFile);
    app.add_option("--x", paths.x, "covariate CSV")->check(CLI::ExistingFile);
    auto* e = app.add_option("--edges", paths.edges, "edge list CSV (from,to; 0-based)")->check(CLI::ExistingFile);
    auto* c = app.add_option("--coords", paths.coords, "node coordinate CSV for the k-NN rule")->check(CLI::ExistingFile);
    e->excludes(c);
    app.add_option("--knn", paths.knn_k, "neighbours in the k-NN rule")->check(CLI::PositiveNumber);
    app.add_flag("--log", log_transform, "log-transform Y columns");
    app.add_flag("--standardize", standardize, "z-score Y columns (population variance)");
    app.add_flag("--standardize-x", standardize_x, "z-score X columns");
  }
  Dataset load() const {
    Preprocess pre;
    pre.log_transform = log_transform;
    pre.standardize = standardize;
    return ingest(paths, pre, standardize_x);
  }
  json to_json() const {
    return {{"y", paths.y}, {"x", paths.x}, {"edges", paths.edges}, {"coords", paths.coords}, {"knn", paths.knn_k},
            {"log_transform", log_transform}, {"standardize", standardize}, {"standardize_x", standardize_x}};
  }
};

void write_manifest(const fs::path& out, const std::string& command, json config, const std::vector<std::string>& files,
                    json runtimes) {
  json m;
  m["command"] = command;
  m["config"] = std::move(config);
  m["outputs"] = files;
  m["created"] = timestamp();
  m["runtimes_seconds"] = std::move(runtimes);
  write_json((out / "manifest.json").string(), m);
}

int cmd_simulate(DgpFlags& dgp, std::uint64_t seed, const fs::path& out) {
  DgpConfig cfg = dgp.resolve();
  cfg.seed = seed;
  fs::create_directories(out);
  const SimulatedData sim = simulate(cfg);
  auto names = [](const char* prefix, Index k) {
    std::vector<std::string> v;
    for (Index i = 0; i < k; ++i) v.push_back(prefix + std::to_string(i));
    return v;
  };
  write_csv((out / "Y.csv").string(), names("y", cfg.p), sim.Y);
  std::vector<std::string> files = {"Y.csv", "edges.csv", "Z.csv", "truth.json"};
  if (cfg.q > 0) {
    write_csv((out / "X.csv").string(), names("x", cfg.q), sim.X);
    files.push_back("X.csv");
  }
  write_csv((out / "Z.csv").string(), names("z", cfg.d), sim.Z);
  write_edge_list((out / "edges.csv").string(), sim.adjacency);
  json truth;
  truth["rho"] = std::vector<double>(sim.truth.rho.data(), sim.truth.rho.data() + sim.truth.rho.size());
  truth["tau"] = std::vector<double>(sim.truth.tau.data(), sim.truth.tau.data() + sim.truth.tau.size());
  json beta = json::array(), b = json::array();
  for (Index j = 0; j < cfg.p; ++j) {
    beta.push_back(std::vector<double>(cfg.q));
    for (Index k = 0; k < cfg.q; ++k) beta.back()[static_cast<std::size_t>(k)] = sim.truth.beta(j, k);
    b.push_back(std::vector<double>(cfg.d));
    for (Index k = 0; k < cfg.d; ++k) b.back()[static_cast<std::size_t>(k)] = sim.truth.B(j, k);
  }
  truth["beta"] = beta;
  truth["B"] = b;
  truth["supports"] = supports_json(sim.truth.supports);
  write_json((out / "truth.json").string(), truth);
  write_manifest(out, "simulate", {{"dgp", dgp_json(cfg)}}, files, json::object());
  std::cout << "simulated n=" << cfg.n << " p=" << cfg.p << " q=" << cfg.q << " d=" << cfg.d << " ("
            << to_string(cfg.network) << ", " << sim.adjacency.edge_count() << " links) -> " << out.string() << "\n";
  return kOk;
}

int cmd_fit(const InputFlags& in, const PipelineFlags& pf, std::uint64_t seed, int workers, const fs::path& out) {
  const Dataset data = in.load();
  PipelineConfig cfg = pf.resolve();
  cfg.seed = seed;
  cfg.workers = workers;
  fs::create_directories(out);
  const PipelineResult res = fit_pipeline(data.Y, data.X, data.W, cfg);
  std::vector<std::string> files;
  if (cfg.stages.cmle) {
    write_components_csv((out / "components.csv").string(), res, data.y_names);
    files.push_back("components.csv");
  }
  write_json((out / "supports.json").string(), supports_json(res.supports));
  files.push_back("supports.json");
  if (!res.paths.empty()) {
    write_scad_paths_csv((out / "scad_path.csv").string(), res);
    files.push_back("scad_path.csv");
  }
  if (res.has_factors) {
    write_eigenvalues_csv((out / "eigenvalues.csv").string(), res.factors.eigenvalues);
    write_json((out / "factors.json").string(), factor_json(res));
    files.push_back("eigenvalues.csv");
    files.push_back("factors.json");
  }
  json log = {{"preprocessing", data.log}, {"warnings", res.warnings}};
  write_json((out / "log.json").string(), log);
  files.push_back("log.json");
  json config = {{"input", in.to_json()}, {"pipeline", pf.to_json()}, {"seed", seed}, {"workers", workers}};
  write_manifest(out, "fit", config, files, res.seconds);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "fitted " << data.Y.cols() << " responses on " << data.Y.rows() << " nodes (" << cfg.stages.to_string()
            << ") -> " << out.string() << "\n";
  return kOk;
}

int cmd_experiment(DgpFlags& dgp, const PipelineFlags& pf, const std::vector<Index>& ns,
                   const std::vector<Index>& ps, const std::vector<std::string>& networks, int replications,
                   std::uint64_t seed_base, Index d_max, bool oracle, int workers, const fs::path& out) {
  fs::create_directories(out);
  std::vector<MetricsReport> reports;
  std::vector<std::string> files;
  json cells = json::array(), runtimes = json::object();
  bool failed = false;
  for (const auto& net : networks)
    for (Index n : ns)
      for (Index p : ps) {
        dgp.network = net;
        DgpConfig cfg = dgp.resolve();
        cfg.n = n;
        cfg.p = p;
        ExperimentSpec spec;
        spec.dgp = cfg;
        spec.replications = replications;
        spec.seed_base = seed_base;
        spec.workers = workers;
        spec.pipeline = pf.resolve();
        spec.d_max = d_max;
        spec.oracle_stub = oracle;
        const MetricsReport rep = run_experiment(spec);
        const std::string tag = net + "_n" + std::to_string(n) + "_p" + std::to_string(p);
        write_replicates_csv((out / ("replicates_" + tag + ".csv")).string(), rep);
        files.push_back("replicates_" + tag + ".csv");
        cells.push_back(report_json(rep));
        runtimes[tag] = rep.seconds;
        std::cout << tag << ": ";
        if (rep.has_cmle) std::cout << "MErr_c=" << rep.merr_c << " ";
        if (rep.has_fmle) std::cout << "MErr_f=" << rep.merr_f << " RIM=" << rep.rim << "% CP(pick)=" << rep.cp_pick << " ";
        if (rep.has_scad) std::cout << "CM=" << rep.cm << "% ";
        if (rep.cp_degenerate) std::cout << "[CP degenerate: zero standard errors] ";
        std::cout << "failures=" << rep.failures << "\n";
        if (rep.failed) {
          failed = true;
          std::cerr << tag << ": failure rate " << rep.failure_rate * 100 << "% exceeds 2%\n";
        }
        reports.push_back(rep);
      }
  write_json((out / "report.json").string(), cells);
  write_boxplot_csv((out / "boxplot.csv").string(), summarize_boxplot_data(reports));
  write_cm_csv((out / "cm.csv").string(), reports);
  files.insert(files.end(), {"report.json", "boxplot.csv", "cm.csv"});
  json config = {{"dgp", dgp_json(dgp.cfg)}, {"n", ns}, {"p", ps}, {"networks", networks},
                 {"replications", replications}, {"seed_base", seed_base}, {"d_max", d_max},
                 {"oracle_stub", oracle}, {"pipeline", pf.to_json()}, {"workers", workers}};
  write_manifest(out, "experiment", config, files, runtimes);
  return failed ? kEstimation : kOk;
}

int cmd_diagnose(const InputFlags& in, const std::string& resid_path, int workers, const fs::path& out) {
  fs::create_directories(out);
  Diagnostics d;
  json config = {{"workers", workers}};
  if (!resid_path.empty()) {
    const Table e = read_csv(resid_path);
    const Dataset data = in.load();
    d = diagnose_residuals(e.values, data.W);
    config["residuals"] = resid_path;
  } else {
    const Dataset data = in.load();
    d = diagnose(data.Y, data.X, data.W, nullptr, {}, workers);
  }
  config["input"] = in.to_json();
  write_json((out / "diagnostics.json").string(), diagnostics_json(d));
  write_eigenvalues_csv((out / "eigenvalues.csv").string(), d.eigenvalues);
  write_manifest(out, "diagnose", config, {"diagnostics.json", "eigenvalues.csv"}, json::object());
  std::cout << "factors (ratio rule): " << d.selected_factors << (d.loadings.weak ? " [low confidence]" : "")
            << "  |W|_1=" << d.norm_1 << " |W|_inf=" << d.norm_inf << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-augmented spatial autoregression for high-dimensional network responses"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "out";

  auto* sim = app.add_subcommand("simulate", "draw a network and data from the simulation design");
  DgpFlags sim_dgp;
  sim_dgp.add(*sim);
  sim->add_option("--seed", seed, "network and data seed");
  sim->add_option("--out", out, "output directory");

  auto* fit = app.add_subcommand("fit", "SCAD-BIC, CMLE, factors and FMLE on a dataset");
  InputFlags fit_in;
  PipelineFlags fit_pf;
  fit_in.add(*fit);
  fit_pf.add(*fit);
  fit->add_option("--seed", seed, "partition seed");
  fit->add_option("--workers", workers, "threads")->check(CLI::PositiveNumber);
  fit->add_option("--out", out, "output directory");

  auto* exp = app.add_subcommand("experiment", "Monte-Carlo replications over (network, n, p) cells");
  DgpFlags exp_dgp;
  PipelineFlags exp_pf;
  exp_dgp.add(*exp);
  exp_pf.add(*exp, false);
  std::vector<Index> ns, ps;
  std::vector<std::string> networks;
  int replications = 100;
  Index d_max = -1;
  bool oracle = false;
  exp->add_option("--n-grid", ns, "node counts (overrides --n)");
  exp->add_option("--p-grid", ps, "response counts (overrides --p)");
  exp->add_option("--networks", networks, "network models (overrides --network)");
  exp->add_option("--replications", replications, "replicates per cell")->check(CLI::PositiveNumber);
  exp->add_option("--seed-base", seed, "replicate r uses seed-base + r");
  exp->add_option("--d-max", d_max, "working factor count (-1: true d + 2)");
  exp->add_flag("--oracle-stub", oracle, "replace estimators with the truth (pipeline check)");
  exp->add_option("--workers", workers, "threads")->check(CLI::PositiveNumber);
  exp->add_option("--out", out, "output directory");

  auto* diag = app.add_subcommand("diagnose", "residual eigenvalues, factor count and weight-matrix norms");
  InputFlags diag_in;
  std::string resid;
  diag_in.add(*diag);
  diag->add_option("--residuals", resid, "residual CSV instead of fitting CMLE")->check(CLI::ExistingFile);
  diag->add_option("--workers", workers, "threads")->check(CLI::PositiveNumber);
  diag->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(sim_dgp, seed, out);
    if (*fit) {
      if (fit_in.paths.edges.empty() && fit_in.paths.coords.empty())
        throw std::invalid_argument("--edges or --coords is required");
      return cmd_fit(fit_in, fit_pf, seed, workers, out);
    }
    if (*exp) {
      if (ns.empty()) ns.push_back(exp_dgp.cfg.n);
      if (ps.empty()) ps.push_back(exp_dgp.cfg.p);
      if (networks.empty()) networks.push_back(exp_dgp.network);
      return cmd_experiment(exp_dgp, exp_pf, ns, ps, networks, replications, seed, d_max, oracle, workers, out);
    }
    if (*diag) {
      if (diag_in.paths.edges.empty() && diag_in.paths.coords.empty())
        throw std::invalid_argument("--edges or --coords is required");
      return cmd_diagnose(diag_in, resid, workers, out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const EstimationError& e) {
    std::cerr << "estimation failure: " << e.what() << "\n";
    return kEstimation;
  } catch (const std::exception& e) {
    std::cerr << "estimation failure: " << e.what() << "\n";
    return kEstimation;
  }
  return kUsage;
}
