#pragma once

#include "fsar/dgp.hpp"
#include "fsar/pipeline.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fsar {

struct ExperimentSpec {
  DgpConfig dgp;
  int replications = 100;
  std::uint64_t seed_base = 1;  // replicate r simulates with seed_base + r
  int workers = 1;
  PipelineConfig pipeline;      // seed and workers are set per replicate
  Index d_max = -1;             // -1: true d + 2
  bool oracle_stub = false;     // estimators replaced by the truth

  void validate() const;
};

struct ReplicateResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double seconds = 0.0;

  std::vector<double> rho_c, rho_f, se_f;  // per component; empty if not run
  double max_err_c = 0.0, max_err_f = 0.0;
  double sum_err_c = 0.0, sum_err_f = 0.0;
  std::vector<char> covered;

  bool has_supports = false;
  bool all_exact = false;
  int exact_components = 0;

  double factor_error = 0.0;
  int selected_factors = 0;
  int se_disagreements = 0;
  int boundary_hits = 0;
};

struct MetricsReport {
  ExperimentSpec spec;
  std::vector<ReplicateResult> replicates;
  int failures = 0;
  double failure_rate = 0.0;
  bool failed = false;  // failure rate above 2%

  bool has_cmle = false, has_fmle = false, has_scad = false, has_factor = false;
  double merr_c = 0.0, merr_f = 0.0;
  double rim = 0.0;                 // percent; NaN when MErr_c is zero
  std::vector<double> cp;           // percent, per component
  double cp_min = 0.0, cp_median = 0.0, cp_max = 0.0;
  int cp_pick_index = -1;
  double cp_pick = 0.0;
  bool cp_degenerate = false;       // zero standard errors
  double cm = 0.0;                  // percent of replicates with every support exact
  double median_factor_error = 0.0;
  std::vector<double> se_ratio;     // per component: mean SE / Monte-Carlo SD of rho_f
  double seconds = 0.0;
};

/// Truth is drawn once from dgp.truth_seed; every replicate draws a fresh
/// network and data. Results do not depend on the worker count.
MetricsReport run_experiment(const ExperimentSpec& spec);

/// Aggregates from the stored per-replicate values (used by run_experiment).
void aggregate(MetricsReport& report);

struct BoxplotRow {
  std::string network;
  Index n = 0, p = 0;
  std::string estimator;  // cmle or fmle
  int count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;  // of log MaxErr
};

/// log(MaxErr) quantiles per (network, n, p, estimator).
std::vector<BoxplotRow> summarize_boxplot_data(const std::vector<MetricsReport>& reports);

/// Linear-interpolation sample quantile, prob in [0, 1].
double quantile(std::vector<double> values, double prob);

}  // namespace fsar
