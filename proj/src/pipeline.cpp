// SPDX-License-Identifier: MIT
#include "gotd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gotd/fe_quadrature.hpp"
#include "gotd/tensor_io.hpp"

namespace gotd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::size_t parse_size(const std::string& s, const std::string& key) {
  try {
    const long long v = std::stoll(s);
    GOTD_CHECK(v >= 0, "config: negative value for " + key);
    return static_cast<std::size_t>(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse integer '" + s + "' for " + key);
  }
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    GOTD_CHECK(used == s.size(), "config: trailing junk in " + key);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse number '" + s + "' for " + key);
  }
}

std::vector<std::size_t> parse_size_list(const std::string& s,
                                         const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& part : split(s, ','))
    out.push_back(parse_size(part, key));
  return out;
}

// 1-based indices or ranges: "3", "1,4,5", "5-20", "all" (empty result).
std::vector<std::size_t> parse_index_set(const std::string& s,
                                         const std::string& key) {
  if (trim(s) == "all") return {};
  std::vector<std::size_t> out;
  for (const auto& part : split(s, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      const std::size_t v = parse_size(part, key);
      GOTD_CHECK(v >= 1, "config: indices in " + key + " are 1-based");
      out.push_back(v - 1);
    } else {
      const std::size_t lo = parse_size(part.substr(0, dash), key);
      const std::size_t hi = parse_size(part.substr(dash + 1), key);
      GOTD_CHECK(lo >= 1 && hi >= lo, "config: bad range in " + key);
      for (std::size_t v = lo; v <= hi; ++v) out.push_back(v - 1);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    GOTD_CHECK(eq != std::string::npos, "config line " + std::to_string(lineno) +
                                            ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    GOTD_CHECK(!key.empty() && !val.empty(),
               "config line " + std::to_string(lineno) + ": empty key or value");
    GOTD_CHECK(kv.emplace(key, val).second,
               "config: duplicate key '" + key + "'");
  }

  RunConfig cfg;
  std::map<std::size_t, QoISpec> qoi_map;
  for (const auto& [key, val] : kv) {
    if (key == "input.tensor") {
      cfg.input_path = val;
    } else if (key == "synth.dims") {
      cfg.synth.dims = parse_size_list(val, key);
      cfg.has_synth = true;
    } else if (key == "synth.rank") {
      cfg.synth.rank = static_cast<Eigen::Index>(parse_size(val, key));
      cfg.has_synth = true;
    } else if (key == "synth.noise") {
      cfg.synth.noise = parse_double(val, key);
      cfg.has_synth = true;
    } else if (key == "model.kind") {
      if (val == "cp")
        cfg.kind = ModelKind::cp;
      else if (val == "tucker")
        cfg.kind = ModelKind::tucker;
      else
        throw ConfigError("config: model.kind must be cp or tucker");
    } else if (key == "model.rank") {
      cfg.rank = static_cast<Eigen::Index>(parse_size(val, key));
    } else if (key == "model.tolerance") {
      cfg.tolerance = parse_double(val, key);
    } else if (key == "model.ranks") {
      cfg.tucker_ranks = parse_size_list(val, key);
    } else if (key == "variable.mode") {
      const std::size_t m = parse_size(val, key);
      GOTD_CHECK(m >= 1, "config: variable.mode is 1-based");
      cfg.variable_mode = m - 1;
    } else if (key == "scaling.mode") {
      cfg.scaling_mode = val;
    } else if (key == "als.tolerance") {
      cfg.als.fit_tolerance = parse_double(val, key);
    } else if (key == "als.max_iterations") {
      cfg.als.max_iterations = parse_size(val, key);
    } else if (key == "optimizer.kind") {
      cfg.optimizer = val;
    } else if (key == "optimizer.iterations") {
      cfg.opt.max_outer_iterations = parse_size(val, key);
    } else if (key == "output.dir") {
      cfg.output_dir = val;
    } else if (key == "seed") {
      cfg.seed = parse_size(val, key);
    } else if (key.rfind("qoi.", 0) == 0) {
      const auto rest = key.substr(4);
      const auto dot = rest.find('.');
      GOTD_CHECK(dot != std::string::npos,
                 "config: expected qoi.<n>.<field> in '" + key + "'");
      const std::size_t n = parse_size(rest.substr(0, dot), key);
      GOTD_CHECK(n >= 1, "config: QoI indices are 1-based");
      const std::string field = rest.substr(dot + 1);
      QoISpec& q = qoi_map[n];
      if (field == "kind") {
        q.kind = val;
      } else if (field == "name") {
        q.name = val;
      } else if (field == "vars") {
        q.vars = parse_index_set(val, key);
        GOTD_CHECK(!q.vars.empty(), "config: " + key + " must list variables");
      } else if (field == "density_vars") {
        q.density_vars = parse_index_set(val, key);
      } else if (field == "ux") {
        const std::size_t v = parse_size(val, key);
        GOTD_CHECK(v >= 1, "config: variable indices are 1-based");
        q.ux = v - 1;
      } else if (field == "uy") {
        const std::size_t v = parse_size(val, key);
        GOTD_CHECK(v >= 1, "config: variable indices are 1-based");
        q.uy = v - 1;
      } else if (field == "coefficient") {
        q.coefficient = parse_double(val, key);
      } else if (field == "times") {
        q.times = parse_index_set(val, key);
      } else if (field == "mesh") {
        q.mesh_path = val;
      } else if (field == "mu0") {
        q.mu0 = parse_double(val, key);
      } else if (field == "rho_min") {
        q.rho_min = parse_double(val, key);
      } else {
        throw ConfigError("config: unknown QoI field '" + key + "'");
      }
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  for (auto& [n, q] : qoi_map) {
    if (q.name.empty()) q.name = "qoi" + std::to_string(n);
    cfg.qois.push_back(std::move(q));
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  GOTD_CHECK(in.good(), "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config_text(ss.str());
}

void RunConfig::validate() const {
  GOTD_CHECK(!input_path.empty() || has_synth,
             "config: provide input.tensor or a synth.* block");
  GOTD_CHECK(input_path.empty() || !has_synth,
             "config: input.tensor and synth.* are mutually exclusive");
  if (kind == ModelKind::cp) {
    GOTD_CHECK(rank >= 1, "config: CP runs need model.rank >= 1");
    GOTD_CHECK(tolerance == 0.0 && tucker_ranks.empty(),
               "config: model.tolerance/model.ranks are Tucker-only");
  } else {
    GOTD_CHECK(rank == 0, "config: model.rank is CP-only");
    const bool has_tol = tolerance > 0.0;
    const bool has_ranks = !tucker_ranks.empty();
    GOTD_CHECK(has_tol != has_ranks,
               "config: Tucker runs need exactly one of model.tolerance or "
               "model.ranks");
  }
  GOTD_CHECK(scaling_mode == "mean-std" || scaling_mode == "none",
             "config: scaling.mode must be mean-std or none");
  GOTD_CHECK(optimizer == "tr-newton" || optimizer == "lbfgs",
             "config: optimizer.kind must be tr-newton or lbfgs");
  GOTD_CHECK(opt.max_outer_iterations >= 1,
             "config: optimizer.iterations must be positive");
  std::set<std::string> names;
  for (const auto& q : qois) {
    GOTD_CHECK(names.insert(q.name).second,
               "config: duplicate QoI name '" + q.name + "'");
    GOTD_CHECK(q.kind == "variable-sum" || q.kind == "kinetic-energy" ||
                   q.kind == "fe-ie" || q.kind == "fe-ke" || q.kind == "fe-me" ||
                   q.kind == "fe-momentum",
               "config: unknown QoI kind '" + q.kind + "'");
    if (q.kind.rfind("fe-", 0) == 0)
      GOTD_CHECK(!q.mesh_path.empty(),
                 "config: QoI '" + q.name + "' needs qoi.<n>.mesh");
  }
}

DenseTensor load_input_tensor(const RunConfig& cfg) {
  if (!cfg.input_path.empty()) return read_tensor_file(cfg.input_path);
  SynthSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  return synth_generate(spec);
}

std::vector<QoIDefinition> build_qois(const RunConfig& cfg,
                                      const std::vector<std::size_t>& dims) {
  const std::size_t d = dims.size();
  GOTD_CHECK(d >= 2, "pipeline: tensor needs a time mode");
  GOTD_CHECK(cfg.variable_mode + 1 < d,
             "pipeline: variable mode must precede the time mode");
  const std::size_t tau = dims.back();

  std::map<std::string, std::shared_ptr<const HexMesh>> meshes;
  const auto mesh_for = [&](const QoISpec& q) {
    auto it = meshes.find(q.mesh_path);
    if (it == meshes.end())
      it = meshes
               .emplace(q.mesh_path, std::make_shared<HexMesh>(
                                         read_hex_mesh_file(q.mesh_path)))
               .first;
    return it->second;
  };

  std::vector<QoIDefinition> out;
  for (const auto& q : cfg.qois) {
    std::vector<std::size_t> times = q.times;
    if (times.empty()) {
      times.resize(tau);
      for (std::size_t t = 0; t < tau; ++t) times[t] = t;
    }
    for (std::size_t t : times)
      GOTD_CHECK(t < tau, "config: QoI '" + q.name + "' time index beyond " +
                              std::to_string(tau));

    if (q.kind == "variable-sum") {
      out.push_back(make_variable_sum_qoi(q.name, cfg.variable_mode, q.vars,
                                          q.coefficient, times));
    } else if (q.kind == "kinetic-energy") {
      out.push_back(make_kinetic_energy_qoi(q.name, cfg.variable_mode,
                                            q.density_vars, q.ux, q.uy,
                                            times));
    } else {
      GOTD_CHECK(d == 5 && cfg.variable_mode == 3,
                 "config: finite-element QoIs require a 5-way tensor with "
                 "variable mode 4");
      FeIntegrand fi;
      if (q.kind == "fe-ie")
        fi = fe_internal_energy_integrand();
      else if (q.kind == "fe-ke")
        fi = fe_kinetic_energy_integrand(q.rho_min);
      else if (q.kind == "fe-me")
        fi = fe_magnetic_energy_integrand(q.mu0);
      else
        fi = fe_momentum_integrand();
      out.push_back(make_fe_qoi(q.name, fi, mesh_for(q), trilinear_rule(),
                                q.vars, times));
    }
  }
  return out;
}

double compression_ratio_cp(const std::vector<std::size_t>& dims,
                            Eigen::Index rank) {
  double elements = 1.0, params = 0.0;
  for (std::size_t d : dims) {
    elements *= static_cast<double>(d);
    params += static_cast<double>(d) * static_cast<double>(rank);
  }
  return elements / params;
}

double compression_ratio_tucker(const std::vector<std::size_t>& dims,
                                const std::vector<std::size_t>& ranks) {
  double elements = 1.0, params = 1.0;
  for (std::size_t r : ranks) params *= static_cast<double>(r);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    elements *= static_cast<double>(dims[k]);
    params += static_cast<double>(dims[k]) * static_cast<double>(ranks[k]);
  }
  return elements / params;
}

namespace {

double qoi_rel_err(const QoIDefinition& q, const std::vector<double>& data,
                   const std::vector<double>& model) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < q.time_set.size(); ++i) {
    const double d = data[i] - model[i];
    num += d * d;
    den += data[i] * data[i];
  }
  GOTD_CHECK_NUMERIC(den > 0.0, "QoI '" + q.name +
                                    "' has zero data norm; relative error "
                                    "undefined");
  return num / den;
}

std::vector<double> qoi_trajectory(const QoIDefinition& q,
                                   const DenseTensor& unscaled) {
  std::vector<double> out;
  out.reserve(q.time_set.size());
  for (std::size_t t : q.time_set) out.push_back(q.evaluate(unscaled, t));
  return out;
}

struct PreparedRun {
  DenseTensor x;         // unscaled data
  ScalingInfo scaling;
  DenseTensor x_scaled;
  std::vector<QoIDefinition> all_qois;
  std::vector<std::string> qoi_kinds;
};

PreparedRun prepare(const RunConfig& cfg) {
  cfg.validate();
  PreparedRun p;
  p.x = load_input_tensor(cfg);
  GOTD_CHECK(cfg.variable_mode + 1 < p.x.order(),
             "pipeline: variable mode must precede the time mode");
  p.scaling = cfg.scaling_mode == "mean-std"
                  ? compute_scaling(p.x, cfg.variable_mode)
                  : ScalingInfo::identity(cfg.variable_mode,
                                          p.x.dim(cfg.variable_mode));
  p.x_scaled = apply_scaling(p.x, p.scaling);
  p.all_qois = build_qois(cfg, p.x.dims());
  for (const auto& q : cfg.qois) p.qoi_kinds.push_back(q.kind);
  return p;
}

void fill_qoi_reports(RunReport& report, const PreparedRun& p,
                      const std::vector<std::string>& dropped,
                      const DenseTensor& initial_unscaled,
                      const DenseTensor& final_unscaled) {
  for (std::size_t i = 0; i < p.all_qois.size(); ++i) {
    const auto& q = p.all_qois[i];
    QoIReport qr;
    qr.name = q.name;
    qr.kind = p.qoi_kinds[i];
    qr.dropped = std::find(dropped.begin(), dropped.end(), q.name) !=
                 dropped.end();
    qr.times = q.time_set;
    qr.data_values = qoi_trajectory(q, p.x);
    qr.initial_values = qoi_trajectory(q, initial_unscaled);
    qr.final_values = qoi_trajectory(q, final_unscaled);
    qr.initial_rel_err = qoi_rel_err(q, qr.data_values, qr.initial_values);
    qr.final_rel_err = qoi_rel_err(q, qr.data_values, qr.final_values);
    report.qois.push_back(std::move(qr));
  }
}

}  // namespace

RunReport run_pipeline(const RunConfig& cfg) {
  PreparedRun p = prepare(cfg);
  GOTD_CHECK(!p.all_qois.empty(),
             "pipeline: goal-oriented runs need at least one QoI");

  RunReport report;
  report.seed = cfg.seed;
  report.dims = p.x.dims();

  // Classic fit for the initial guess.
  GoalProblem problem;
  Vector v0;
  DenseTensor initial_recon_scaled;
  if (cfg.kind == ModelKind::cp) {
    AlsConfig als = cfg.als;
    als.rank = cfg.rank;
    als.init_seed = cfg.seed;
    CpAlsResult fit = cp_als(p.x_scaled, als);
    initial_recon_scaled = reconstruct_cp(fit.model);
    problem = make_goal_problem(p.x_scaled, p.scaling, p.all_qois, fit.model);
    v0 = flatten_cp(fit.model);
    report.model_kind = "cp";
    report.cp_rank = cfg.rank;
    report.compression_ratio = compression_ratio_cp(p.x.dims(), cfg.rank);
  } else {
    SthosvdConfig hc;
    hc.tolerance = cfg.tolerance;
    hc.ranks = cfg.tucker_ranks;
    TuckerModel fit = sthosvd(p.x_scaled, hc);
    initial_recon_scaled = reconstruct_tucker(fit);
    problem = make_goal_problem(p.x_scaled, p.scaling, p.all_qois, fit);
    v0 = flatten_tucker(fit);
    report.model_kind = "tucker";
    report.tucker_ranks = fit.ranks();
    report.compression_ratio =
        compression_ratio_tucker(p.x.dims(), fit.ranks());
  }

  GoalEvaluator ev(problem);
  const Objective f = [&ev](const Vector& v) { return ev.objective(v); };
  const GradientFn g = [&ev](const Vector& v) { return ev.gradient(v); };
  const HessVecFn h = [&ev](const Vector& v, const Vector& w) {
    return ev.gn_hess_vec(v, w);
  };
  const PrecondBuildFn pb = [&ev](const Vector& v) {
    auto pre = std::make_shared<Preconditioner>(ev.build_preconditioner(v));
    return std::function<Vector(const Vector&)>(
        [pre](const Vector& r) { return pre->apply(r); });
  };
  const TermProbeFn probe = [&ev](const Vector& v) {
    return ev.term_breakdown(v);
  };

  OptResult res = cfg.optimizer == "lbfgs"
                      ? lbfgs_minimize(f, g, v0, cfg.opt, probe)
                      : tr_newton_minimize(f, g, h, pb, v0, cfg.opt, probe);

  DenseTensor final_recon_scaled =
      cfg.kind == ModelKind::cp
          ? reconstruct_cp(unflatten_cp(res.v, problem.cp_layout))
          : reconstruct_tucker(unflatten_tucker(res.v, problem.tucker_layout));
  DenseTensor initial_unscaled = unscale(initial_recon_scaled, p.scaling);
  DenseTensor final_unscaled = unscale(final_recon_scaled, p.scaling);

  report.goal_stage = true;
  report.rel_err_scaled_initial = frob_err(p.x_scaled, initial_recon_scaled);
  report.rel_err_scaled_final = frob_err(p.x_scaled, final_recon_scaled);
  report.rel_err_unscaled_initial = frob_err(p.x, initial_unscaled);
  report.rel_err_unscaled_final = frob_err(p.x, final_unscaled);
  report.f_go_initial = res.trace.records.front().f;
  report.f_go_final = res.f;
  report.effective_qoi_count = problem.qois.size();
  report.alpha = problem.alpha;
  report.dropped_qois = problem.dropped_qois;
  for (const auto& q : problem.qois) report.trace_qoi_names.push_back(q.name);
  report.trace = std::move(res.trace);
  fill_qoi_reports(report, p, report.dropped_qois, initial_unscaled,
                   final_unscaled);
  report.validate();
  return report;
}

RunReport run_classic(const RunConfig& cfg) {
  PreparedRun p = prepare(cfg);

  RunReport report;
  report.seed = cfg.seed;
  report.dims = p.x.dims();
  report.goal_stage = false;

  DenseTensor recon_scaled;
  if (cfg.kind == ModelKind::cp) {
    AlsConfig als = cfg.als;
    als.rank = cfg.rank;
    als.init_seed = cfg.seed;
    CpAlsResult fit = cp_als(p.x_scaled, als);
    recon_scaled = reconstruct_cp(fit.model);
    report.model_kind = "cp";
    report.cp_rank = cfg.rank;
    report.compression_ratio = compression_ratio_cp(p.x.dims(), cfg.rank);
  } else {
    SthosvdConfig hc;
    hc.tolerance = cfg.tolerance;
    hc.ranks = cfg.tucker_ranks;
    TuckerModel fit = sthosvd(p.x_scaled, hc);
    recon_scaled = reconstruct_tucker(fit);
    report.model_kind = "tucker";
    report.tucker_ranks = fit.ranks();
    report.compression_ratio =
        compression_ratio_tucker(p.x.dims(), fit.ranks());
  }

  DenseTensor unscaled = unscale(recon_scaled, p.scaling);
  report.rel_err_scaled_initial = frob_err(p.x_scaled, recon_scaled);
  report.rel_err_scaled_final = report.rel_err_scaled_initial;
  report.rel_err_unscaled_initial = frob_err(p.x, unscaled);
  report.rel_err_unscaled_final = report.rel_err_unscaled_initial;
  fill_qoi_reports(report, p, {}, unscaled, unscaled);
  report.validate();
  return report;
}

void RunReport::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  GOTD_CHECK_NUMERIC(
      finite(compression_ratio) && finite(rel_err_scaled_initial) &&
          finite(rel_err_scaled_final) && finite(rel_err_unscaled_initial) &&
          finite(rel_err_unscaled_final) && finite(f_go_initial) &&
          finite(f_go_final),
      "report: non-finite summary value");
  for (const auto& q : qois)
    GOTD_CHECK_NUMERIC(finite(q.initial_rel_err) && finite(q.final_rel_err),
                       "report: non-finite QoI error");
  if (!goal_stage) return;

  GOTD_CHECK_NUMERIC(std::abs(f_go_initial - 1.0) <= 1e-12,
                     "report: initial objective is not 1 under the weight "
                     "rule");
  GOTD_CHECK_NUMERIC(f_go_final <= f_go_initial + 1e-12,
                     "report: final objective exceeds the initial one");
  if (!trace.records.empty()) {
    const double fro_init = trace.records.front().fro_term;
    const double fro_final = trace.records.back().fro_term;
    if (fro_final >= fro_init * (1.0 - 1e-12)) {
      const double bound =
          1.0 / static_cast<double>(effective_qoi_count + 1) - 1e-6;
      GOTD_CHECK_NUMERIC(f_go_final >= bound,
                         "report: final objective below the 1/(Q+1) bound");
    }
  }
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void emit_report(const RunReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  GOTD_CHECK(!ec, "cannot create output directory '" + dir + "'");

  // summary.json
  nlohmann::json j;
  j["model"]["kind"] = report.model_kind;
  if (report.model_kind == "cp")
    j["model"]["rank"] = report.cp_rank;
  else
    j["model"]["ranks"] = report.tucker_ranks;
  j["dims"] = report.dims;
  j["seed"] = report.seed;
  j["compression_ratio"] = report.compression_ratio;
  j["rel_err_scaled_initial"] = report.rel_err_scaled_initial;
  j["rel_err_scaled_final"] = report.rel_err_scaled_final;
  j["rel_err_unscaled_initial"] = report.rel_err_unscaled_initial;
  j["rel_err_unscaled_final"] = report.rel_err_unscaled_final;
  j["goal_stage"] = report.goal_stage;
  if (report.goal_stage) {
    j["f_go_initial"] = report.f_go_initial;
    j["f_go_final"] = report.f_go_final;
    j["alpha"] = report.alpha;
    j["effective_qoi_count"] = report.effective_qoi_count;
    j["dropped_qois"] = report.dropped_qois;
    j["accepted_iterations"] = report.trace.records.size() - 1;
    j["line_search_failed"] = report.trace.line_search_failed;
  }
  j["qois"] = nlohmann::json::array();
  for (const auto& q : report.qois) {
    nlohmann::json qj;
    qj["name"] = q.name;
    qj["kind"] = q.kind;
    qj["dropped"] = q.dropped;
    qj["initial_rel_err"] = q.initial_rel_err;
    qj["final_rel_err"] = q.final_rel_err;
    if (q.kind == "fe-momentum") {
      // Displayed as sqrt(M); the optimized residual uses M itself.
      qj["initial_sqrt_final_value"] =
          std::sqrt(std::max(q.initial_values.back(), 0.0));
      qj["final_sqrt_final_value"] =
          std::sqrt(std::max(q.final_values.back(), 0.0));
    }
    j["qois"].push_back(qj);
  }
  {
    std::ofstream out(dir + "/summary.json");
    GOTD_CHECK(out.good(), "cannot write summary.json in '" + dir + "'");
    out << j.dump(2) << "\n";
  }

  // qoi_trajectories.csv (times are 1-based in the file).
  {
    std::ofstream out(dir + "/qoi_trajectories.csv");
    GOTD_CHECK(out.good(), "cannot write qoi_trajectories.csv");
    out << "time,qoi_name,data,initial_model,final_model\n";
    for (const auto& q : report.qois) {
      for (std::size_t i = 0; i < q.times.size(); ++i)
        out << q.times[i] + 1 << ',' << q.name << ',' << fmt17(q.data_values[i])
            << ',' << fmt17(q.initial_values[i]) << ','
            << fmt17(q.final_values[i]) << '\n';
      if (q.kind == "fe-momentum") {
        for (std::size_t i = 0; i < q.times.size(); ++i)
          out << q.times[i] + 1 << ',' << q.name << ".sqrt,"
              << fmt17(std::sqrt(std::max(q.data_values[i], 0.0))) << ','
              << fmt17(std::sqrt(std::max(q.initial_values[i], 0.0))) << ','
              << fmt17(std::sqrt(std::max(q.final_values[i], 0.0))) << '\n';
      }
    }
  }

  // trace.csv
  {
    std::ofstream out(dir + "/trace.csv");
    GOTD_CHECK(out.good(), "cannot write trace.csv");
    out << "iteration,f_go,grad_norm,fro_term";
    for (const auto& name : report.trace_qoi_names)
      out << ",qoi_term." << name;
    out << ",step_norm,tcg_iterations,accepted\n";
    for (const auto& r : report.trace.records) {
      out << r.iteration << ',' << fmt17(r.f) << ',' << fmt17(r.grad_norm)
          << ',' << fmt17(r.fro_term);
      for (double q : r.qoi_terms) out << ',' << fmt17(q);
      out << ',' << fmt17(r.step_norm) << ',' << r.tcg_iterations << ','
          << (r.accepted ? 1 : 0) << '\n';
    }
  }
}

}  // namespace gotd
