/**
 * @file tfr_main.cpp
 * @brief `tfr` command-line front end.
 */
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tfr/commands.hpp"
#include "tfr/error.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Template-based Fourier reconstruction anomaly detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tfr::kToolVersion));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON config or a previous run manifest");
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "Progress on stderr");

  std::string out, data, checkpoint, tmpl, input, debug_dir;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen->add_option("--out", out, "Output corpus directory")->required();

  auto* train = app.add_subcommand("train", "Train the autoencoder on train/good");
  train->add_option("--data", data, "Dataset root")->required();
  train->add_option("--out", out, "Output directory")->required();

  auto* templates = app.add_subcommand("templates", "Select the normal template");
  templates->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  templates->add_option("--data", data, "Dataset root")->required();
  templates->add_option("--out", out, "Output directory")->required();

  auto* detect = app.add_subcommand("detect", "Score images");
  detect->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  detect->add_option("--template", tmpl, "template.json")->required();
  detect->add_option("--input", input, "Image, image folder or dataset root")->required();
  detect->add_option("--out", out, "Output directory")->required();
  detect->add_option("--debug-dir", debug_dir, "Write per-image intermediates here");

  auto* sweep = app.add_subcommand("sweep", "(tau, th) grid search");
  auto* ablate = app.add_subcommand("ablate", "Three-mode ablation");
  for (auto* sub : {sweep, ablate}) {
    sub->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
    sub->add_option("--template", tmpl, "template.json")->required();
    sub->add_option("--data", data, "Dataset root")->required();
    sub->add_option("--out", out, "Output directory")->required();
  }

  auto* experiment = app.add_subcommand("experiment", "gen, train, templates, sweep and ablate");
  experiment->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    tfr::RunContext ctx;
    if (!config_path.empty()) ctx.config = tfr::load_config(config_path);
    if (seed) ctx.config.seed = *seed;
    tfr::validate_config(ctx.config);
    ctx.threads = threads;
    ctx.verbose = verbose;

    if (gen->parsed()) {
      tfr::cmd_gen(ctx, out);
    } else if (train->parsed()) {
      tfr::cmd_train(ctx, data, out);
    } else if (templates->parsed()) {
      tfr::cmd_templates(ctx, checkpoint, data, out);
    } else if (detect->parsed()) {
      std::optional<fs::path> dbg;
      if (!debug_dir.empty()) dbg = debug_dir;
      tfr::cmd_detect(ctx, checkpoint, tmpl, input, out, dbg);
    } else if (sweep->parsed()) {
      const auto table = tfr::cmd_sweep(ctx, checkpoint, tmpl, data, out);
      std::printf("best auc %.6f at tau=%d th=%g\n", table.best.auc, table.best.tau, table.best.th);
    } else if (ablate->parsed()) {
      const auto r = tfr::cmd_ablate(ctx, checkpoint, tmpl, data, out);
      std::printf("fourier_only %.6f recon_only %.6f combined %.6f\n", r.fourier_only.best.auc,
                  r.recon_only.best.auc, r.combined.best.auc);
    } else if (experiment->parsed()) {
      const auto r = tfr::cmd_experiment(ctx, out);
      std::printf("best auc %.6f at tau=%d th=%g\n", r.sweep.best.auc, r.sweep.best.tau, r.sweep.best.th);
      std::printf("fourier_only %.6f recon_only %.6f combined %.6f\n", r.ablation.fourier_only.best.auc,
                  r.ablation.recon_only.best.auc, r.ablation.combined.best.auc);
    }
  } catch (const tfr::Error& e) {
    std::cerr << "tfr: error [" << tfr::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tfr: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
