// SPDX-License-Identifier: MIT
//
// Goal-oriented tensor decomposition driver.
//
//   gotd_cli <subcommand> --config <file> [overrides]
//
// Subcommands: synth, cp-als, sthosvd, go-cp, go-tucker, qoi-eval.
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gotd/pipeline.hpp"
#include "gotd/tensor_io.hpp"

namespace {

struct Overrides {
  std::string config_path;
  long long rank = -1;
  double tol = -1.0;
  long long iters = -1;
  std::string optimizer;
  long long seed = -1;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "run configuration file")
      ->required();
  cmd->add_option("--rank", o.rank, "override the CP rank");
  cmd->add_option("--tol", o.tol, "override the ST-HOSVD tolerance");
  cmd->add_option("--iters", o.iters, "override the optimizer iterations");
  cmd->add_option("--optimizer", o.optimizer,
                  "override the optimizer (tr-newton | lbfgs)");
  cmd->add_option("--seed", o.seed, "override the seed");
  cmd->add_option("--out", o.out, "override the output directory");
}

gotd::RunConfig load_with_overrides(const Overrides& o) {
  gotd::RunConfig cfg = gotd::parse_run_config(o.config_path);
  if (o.rank >= 0) cfg.rank = static_cast<Eigen::Index>(o.rank);
  if (o.tol >= 0.0) {
    cfg.tolerance = o.tol;
    cfg.tucker_ranks.clear();
  }
  if (o.iters >= 0)
    cfg.opt.max_outer_iterations = static_cast<std::size_t>(o.iters);
  if (!o.optimizer.empty()) cfg.optimizer = o.optimizer;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

void print_goal_summary(const gotd::RunReport& r) {
  std::printf("model: %s  compression: %.4gx\n", r.model_kind.c_str(),
              r.compression_ratio);
  std::printf("rel tensor err (unscaled): %.6e -> %.6e\n",
              r.rel_err_unscaled_initial, r.rel_err_unscaled_final);
  if (r.goal_stage)
    std::printf("f_go: %.6f -> %.6f  (floor 1/(Q+1) = %.6f)\n", r.f_go_initial,
                r.f_go_final,
                1.0 / static_cast<double>(r.effective_qoi_count + 1));
  for (const auto& q : r.qois)
    std::printf("qoi %-16s rel err: %.6e -> %.6e%s\n", q.name.c_str(),
                q.initial_rel_err, q.final_rel_err,
                q.dropped ? "  (dropped: already preserved)" : "");
}

int run_synth(const Overrides& o) {
  gotd::RunConfig cfg = load_with_overrides(o);
  GOTD_CHECK(cfg.has_synth, "synth: config needs a synth.* block");
  gotd::DenseTensor x = gotd::load_input_tensor(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  GOTD_CHECK(!ec, "cannot create output directory '" + cfg.output_dir + "'");
  const std::string path = cfg.output_dir + "/tensor.gotd";
  gotd::write_tensor_file(path, x);
  std::printf("wrote %s (%zu values)\n", path.c_str(), x.size());
  return 0;
}

int run_classic_cmd(const Overrides& o, gotd::ModelKind kind) {
  gotd::RunConfig cfg = load_with_overrides(o);
  cfg.kind = kind;
  gotd::RunReport report = gotd::run_classic(cfg);
  gotd::emit_report(report, cfg.output_dir);
  print_goal_summary(report);
  return 0;
}

int run_goal_cmd(const Overrides& o, gotd::ModelKind kind) {
  gotd::RunConfig cfg = load_with_overrides(o);
  cfg.kind = kind;
  gotd::RunReport report = gotd::run_pipeline(cfg);
  gotd::emit_report(report, cfg.output_dir);
  print_goal_summary(report);
  return 0;
}

int run_qoi_eval(const Overrides& o) {
  gotd::RunConfig cfg = load_with_overrides(o);
  gotd::DenseTensor x = gotd::load_input_tensor(cfg);
  std::vector<gotd::QoIDefinition> qois = gotd::build_qois(cfg, x.dims());
  GOTD_CHECK(!qois.empty(), "qoi-eval: no QoIs configured");

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  GOTD_CHECK(!ec, "cannot create output directory '" + cfg.output_dir + "'");
  std::ofstream out(cfg.output_dir + "/qoi_values.csv");
  GOTD_CHECK(out.good(), "cannot write qoi_values.csv");
  out << "time,qoi_name,value\n";
  char buf[40];
  for (const auto& q : qois) {
    for (std::size_t t : q.time_set) {
      std::snprintf(buf, sizeof buf, "%.17g", q.evaluate(x, t));
      out << t + 1 << ',' << q.name << ',' << buf << '\n';
    }
  }
  std::printf("wrote %s/qoi_values.csv\n", cfg.output_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-oriented CP/Tucker tensor decomposition"};
  app.require_subcommand(1);

  Overrides o;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic tensor");
  CLI::App* cpals = app.add_subcommand("cp-als", "classic CP decomposition");
  CLI::App* hosvd =
      app.add_subcommand("sthosvd", "classic Tucker decomposition");
  CLI::App* gocp =
      app.add_subcommand("go-cp", "goal-oriented CP decomposition");
  CLI::App* gotucker =
      app.add_subcommand("go-tucker", "goal-oriented Tucker decomposition");
  CLI::App* qoieval =
      app.add_subcommand("qoi-eval", "evaluate QoIs on a tensor");
  for (CLI::App* cmd : {synth, cpals, hosvd, gocp, gotucker, qoieval})
    add_common(cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(o);
    if (cpals->parsed()) return run_classic_cmd(o, gotd::ModelKind::cp);
    if (hosvd->parsed()) return run_classic_cmd(o, gotd::ModelKind::tucker);
    if (gocp->parsed()) return run_goal_cmd(o, gotd::ModelKind::cp);
    if (gotucker->parsed()) return run_goal_cmd(o, gotd::ModelKind::tucker);
    if (qoieval->parsed()) return run_qoi_eval(o);
  } catch (const gotd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gotd::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
