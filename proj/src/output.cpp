#include "fsar/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace fsar {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_support(const std::vector<int>& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? " " : "") + std::to_string(s[k]);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_components_csv(const std::string& path, const PipelineResult& res, const std::vector<std::string>& names) {
  auto out = open_out(path);
  out << "component,name,rho_cmle,se_cmle,sigma_cmle,rho_fmle,se_fmle,se_fmle_numeric,ci_low,ci_high,tau_fmle,"
         "support,boundary_cmle,boundary_fmle,se_disagreement\n";
  const std::size_t p = std::max({res.cmle.size(), res.fmle.size(), res.supports.size()});
  const double nan = std::nan("");
  for (std::size_t j = 0; j < p; ++j) {
    out << j << "," << (j < names.size() ? names[j] : "") << ",";
    if (j < res.cmle.size()) {
      const auto& c = res.cmle[j];
      out << num(c.rho_hat) << "," << num(j < res.cmle_se.size() ? res.cmle_se[j] : nan) << "," << num(c.sigma_hat)
          << ",";
    } else {
      out << ",,,";
    }
    if (j < res.fmle.size()) {
      const auto& f = res.fmle[j];
      const bool cov = f.has_covariance;
      out << num(f.rho_hat) << "," << num(cov ? f.se_rho : nan) << "," << num(cov ? f.se_rho_numeric : nan) << ","
          << num(cov ? f.ci_low() : nan) << "," << num(cov ? f.ci_high() : nan) << "," << num(f.tau_hat) << ",";
    } else {
      out << ",,,,,,";
    }
    out << join_support(j < res.supports.size() ? res.supports[j] : std::vector<int>{}) << ",";
    out << (j < res.cmle.size() ? std::to_string(res.cmle[j].boundary_hit) : "") << ",";
    out << (j < res.fmle.size() ? std::to_string(res.fmle[j].boundary_hit) : "") << ",";
    out << (j < res.fmle.size() ? std::to_string(res.fmle[j].se_disagreement) : "") << "\n";
  }
}

void write_scad_paths_csv(const std::string& path, const PipelineResult& res) {
  auto out = open_out(path);
  out << "component,lambda,rho,sigma,loglik,objective,bic,support_size,support,iterations,converged,failed,selected\n";
  for (std::size_t j = 0; j < res.paths.size(); ++j) {
    const ScadPath& sp = res.paths[j];
    for (std::size_t k = 0; k < sp.records.size(); ++k) {
      const ScadRecord& r = sp.records[k];
      out << j << "," << num(r.lambda) << "," << num(r.rho_hat) << "," << num(r.sigma_hat) << "," << num(r.loglik)
          << "," << num(r.objective) << "," << num(r.bic) << "," << r.support.size() << "," << join_support(r.support)
          << "," << r.iterations << "," << r.converged << "," << r.failed << ","
          << (static_cast<Index>(k) == sp.selected) << "\n";
    }
  }
}

void write_eigenvalues_csv(const std::string& path, const Vector& ev) {
  auto out = open_out(path);
  out << "j,eigenvalue,ratio\n";
  const Index top = std::min<Index>(ev.size(), 30);
  for (Index j = 0; j < top; ++j) {
    const double ratio = j + 1 < ev.size() && ev(j + 1) > 0.0 ? ev(j) / ev(j + 1) : std::nan("");
    out << j + 1 << "," << num(ev(j)) << "," << num(ratio) << "\n";
  }
}

nlohmann::json supports_json(const std::vector<std::vector<int>>& supports) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < supports.size(); ++k) j[std::to_string(k)] = supports[k];
  return j;
}

nlohmann::json factor_json(const PipelineResult& res) {
  nlohmann::json j;
  if (!res.has_factors) return j;
  const auto& proj = res.projection;
  const char* kind = proj.construction == ProjectionKind::random_partition ? "random_partition"
                     : proj.construction == ProjectionKind::hadamard     ? "hadamard"
                                                                         : "user_supplied";
  j["construction"] = kind;
  j["d_max"] = proj.d_max;
  j["holdout_fraction"] = proj.holdout_fraction;
  j["holdout_size"] = proj.holdout.size();
  j["min_eig_MtM_over_p"] = proj.min_eig_mtm;
  const Index top = std::min<Index>(res.factors.eigenvalues.size(), 30);
  std::vector<double> ev(res.factors.eigenvalues.data(), res.factors.eigenvalues.data() + top);
  j["eigenvalues"] = ev;
  j["selected_factors"] = res.selected_factors;
  j["max_ratio"] = finite_or_null(res.loadings.max_ratio);
  j["low_confidence"] = res.loadings.weak;
  return j;
}

nlohmann::json diagnostics_json(const Diagnostics& d) {
  nlohmann::json j;
  j["eigenvalues"] = std::vector<double>(d.eigenvalues.data(), d.eigenvalues.data() + d.eigenvalues.size());
  j["ratios"] = std::vector<double>(d.ratios.data(), d.ratios.data() + d.ratios.size());
  j["selected_factors"] = d.selected_factors;
  j["max_ratio"] = finite_or_null(d.loadings.max_ratio);
  j["low_confidence"] = d.loadings.weak;
  j["low_confidence_threshold"] = 1.5;
  j["norm_1"] = d.norm_1;
  j["norm_inf"] = d.norm_inf;
  j["rho_cmle"] = d.rho;
  std::vector<int> hits;
  for (std::size_t k = 0; k < d.boundary_hit.size(); ++k)
    if (d.boundary_hit[k]) hits.push_back(static_cast<int>(k));
  j["boundary_components"] = hits;
  return j;
}

nlohmann::json dgp_json(const DgpConfig& c) {
  nlohmann::json j;
  j["n"] = c.n;
  j["p"] = c.p;
  j["q"] = c.q;
  j["d"] = c.d;
  j["network"] = to_string(c.network);
  j["sbm_blocks"] = c.sbm_blocks;
  j["seed"] = c.seed;
  j["truth_seed"] = c.truth_seed;
  j["tau_range"] = {c.tau_range.first, c.tau_range.second};
  j["beta_range"] = {c.beta_range.first, c.beta_range.second};
  j["rho_range"] = {c.rho_range.first, c.rho_range.second};
  j["sparsity"] = c.model_size();
  j["noise"] = c.noise == NoiseKind::gaussian ? "gaussian" : "sub_weibull";
  j["weibull_shape"] = c.weibull_shape;
  return j;
}

nlohmann::json report_json(const MetricsReport& rep) {
  nlohmann::json j;
  j["dgp"] = dgp_json(rep.spec.dgp);
  j["replications"] = rep.spec.replications;
  j["seed_base"] = rep.spec.seed_base;
  j["stages"] = rep.spec.pipeline.stages.to_string();
  j["oracle_stub"] = rep.spec.oracle_stub;
  j["failures"] = rep.failures;
  j["failure_rate"] = rep.failure_rate;
  j["failed"] = rep.failed;
  if (rep.has_cmle) j["MErr_c"] = rep.merr_c;
  if (rep.has_fmle) {
    j["MErr_f"] = rep.merr_f;
    j["RIM"] = finite_or_null(rep.rim);
    j["CP"] = {{"min", rep.cp_min}, {"median", rep.cp_median}, {"max", rep.cp_max},
               {"pick_index", rep.cp_pick_index}, {"pick", rep.cp_pick}, {"degenerate", rep.cp_degenerate}};
    j["CP_per_component"] = rep.cp;
    std::vector<nlohmann::json> ratios;
    for (double r : rep.se_ratio) ratios.push_back(finite_or_null(r));
    j["se_over_mc_sd"] = ratios;
  }
  if (rep.has_scad) j["CM"] = rep.cm;
  if (rep.has_factor) j["median_factor_error"] = rep.median_factor_error;
  return j;
}

void write_replicates_csv(const std::string& path, const MetricsReport& rep) {
  auto out = open_out(path);
  out << "replicate,seed,ok,max_err_c,max_err_f,merr_c,merr_f,exact_components,all_exact,factor_error,"
         "selected_factors,se_disagreements,boundary_hits,error\n";
  const double p = static_cast<double>(rep.spec.dgp.p);
  for (std::size_t r = 0; r < rep.replicates.size(); ++r) {
    const auto& x = rep.replicates[r];
    const double nan = std::nan("");
    std::string err = x.error;
    for (char& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    out << r << "," << x.seed << "," << x.ok << "," << num(x.ok && rep.has_cmle ? x.max_err_c : nan) << ","
        << num(x.ok && rep.has_fmle ? x.max_err_f : nan) << "," << num(x.ok && rep.has_cmle ? x.sum_err_c / p : nan)
        << "," << num(x.ok && rep.has_fmle ? x.sum_err_f / p : nan) << "," << x.exact_components << ","
        << x.all_exact << "," << num(x.ok && rep.has_factor ? x.factor_error : nan) << "," << x.selected_factors
        << "," << x.se_disagreements << "," << x.boundary_hits << "," << err << "\n";
  }
}

void write_boxplot_csv(const std::string& path, const std::vector<BoxplotRow>& rows) {
  auto out = open_out(path);
  out << "network,n,p,estimator,count,min,q1,median,q3,max\n";
  for (const auto& r : rows)
    out << r.network << "," << r.n << "," << r.p << "," << r.estimator << "," << r.count << "," << num(r.min) << ","
        << num(r.q1) << "," << num(r.median) << "," << num(r.q3) << "," << num(r.max) << "\n";
}

void write_cm_csv(const std::string& path, const std::vector<MetricsReport>& reports) {
  auto out = open_out(path);
  out << "network,n,p,q,d,replications,CM\n";
  for (const auto& rep : reports) {
    if (!rep.has_scad) continue;
    const auto& d = rep.spec.dgp;
    out << to_string(d.network) << "," << d.n << "," << d.p << "," << d.q << "," << d.d << ","
        << rep.spec.replications - rep.failures << "," << num(rep.cm) << "\n";
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace fsar
