// SPDX-License-Identifier: MIT
#pragma once

#include <string>
#include <vector>

#include "gotd/cp_als.hpp"
#include "gotd/goal.hpp"
#include "gotd/optimize.hpp"
#include "gotd/sthosvd.hpp"
#include "gotd/synth.hpp"

namespace gotd {

/// One QoI entry of a run configuration. Indices are 0-based here; the
/// config-file syntax is 1-based.
struct QoISpec {
  std::string name;
  std::string kind;  // variable-sum | kinetic-energy | fe-ie | fe-ke |
                     // fe-me | fe-momentum
  std::vector<std::size_t> vars;
  std::vector<std::size_t> density_vars;  // kinetic-energy
  std::size_t ux = 0, uy = 0;             // kinetic-energy
  double coefficient = 1.0;               // variable-sum
  std::vector<std::size_t> times;         // empty = every time step
  std::string mesh_path;                  // fe-* kinds
  double mu0 = 1.0;                       // fe-me
  double rho_min = 1e-12;                 // fe-ke
};

struct RunConfig {
  std::string input_path;  // tensor file; empty uses the synthetic spec
  bool has_synth = false;
  SynthSpec synth;
  ModelKind kind = ModelKind::cp;
  Eigen::Index rank = 0;                  // CP rank
  double tolerance = 0.0;                 // ST-HOSVD tolerance
  std::vector<std::size_t> tucker_ranks;  // explicit Tucker ranks (optional)
  std::size_t variable_mode = 0;
  std::string scaling_mode = "mean-std";  // or "none"
  std::vector<QoISpec> qois;
  std::string optimizer = "tr-newton";  // or "lbfgs"
  OptConfig opt;
  AlsConfig als;
  std::string output_dir = ".";
  std::uint64_t seed = 0;

  void validate() const;
};

/// Flat key-value configuration file: `key = value` lines, '#' comments,
/// `qoi.<n>.<field>` groups for QoIs. All mode/variable/time indices in the
/// file are 1-based.
RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text);

struct QoIReport {
  std::string name;
  std::string kind;
  bool dropped = false;
  std::vector<std::size_t> times;  // 0-based
  std::vector<double> data_values;
  std::vector<double> initial_values;
  std::vector<double> final_values;
  double initial_rel_err = 0.0;  // sum (g_X - g_M)^2 / sum g_X^2
  double final_rel_err = 0.0;
};

struct RunReport {
  std::string model_kind;
  std::vector<std::size_t> dims;
  Eigen::Index cp_rank = 0;
  std::vector<std::size_t> tucker_ranks;
  double compression_ratio = 0.0;
  double rel_err_scaled_initial = 0.0, rel_err_scaled_final = 0.0;
  double rel_err_unscaled_initial = 0.0, rel_err_unscaled_final = 0.0;
  bool goal_stage = true;  // false for classic-only runs
  double f_go_initial = 0.0, f_go_final = 0.0;
  std::size_t effective_qoi_count = 0;
  std::vector<double> alpha;
  std::vector<std::string> dropped_qois;
  std::vector<QoIReport> qois;
  std::vector<std::string> trace_qoi_names;
  Trace trace;
  std::uint64_t seed = 0;

  void validate() const;
};

/// End-to-end goal-oriented run: load or generate the tensor, scale it, fit
/// the classic initial model, choose weights, optimize for the fixed budget,
/// and assemble the report. Deterministic under a fixed seed.
RunReport run_pipeline(const RunConfig& cfg);

/// Classic decomposition only (CP-ALS or ST-HOSVD); the report carries the
/// classic model as both the initial and final model.
RunReport run_classic(const RunConfig& cfg);

/// Writes summary.json, qoi_trajectories.csv, and trace.csv into dir.
void emit_report(const RunReport& report, const std::string& dir);

/// Tensor elements divided by model parameter count.
double compression_ratio_cp(const std::vector<std::size_t>& dims,
                            Eigen::Index rank);
double compression_ratio_tucker(const std::vector<std::size_t>& dims,
                                const std::vector<std::size_t>& ranks);

/// Loads or generates the configured tensor.
DenseTensor load_input_tensor(const RunConfig& cfg);

/// Builds the configured QoI definitions against the given tensor shape.
std::vector<QoIDefinition> build_qois(const RunConfig& cfg,
                                      const std::vector<std::size_t>& dims);

}  // namespace gotd
