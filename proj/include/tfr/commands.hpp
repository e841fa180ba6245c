/**
 * @file commands.hpp
 * @brief Pipeline stages behind the `tfr` subcommands.
 *
 * Each stage writes its outputs into an output directory together with a
 * `manifest.json` (tool version, command, inputs, seeds, thread count and the
 * full config snapshot). Passing a manifest back as `--config` re-runs the
 * stage with identical settings.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "tfr/config.hpp"
#include "tfr/detector.hpp"
#include "tfr/eval.hpp"

namespace tfr {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunContext {
  RunConfig config;
  int threads = 1;
  bool verbose = false;
};

/// Synthetic corpus in the dataset layout under `out_dir`.
void cmd_gen(const RunContext& ctx, const std::filesystem::path& out_dir);

/// Trains on `<data_dir>/train/good`; writes model.tfr and train_log.csv.
void cmd_train(const RunContext& ctx, const std::filesystem::path& data_dir,
               const std::filesystem::path& out_dir);

/// Builds candidate templates from train/good, ranks them on test/good (or on
/// the training images when the dataset has no test normals), writes
/// template.json, template.png and template_ranking.csv.
void cmd_templates(const RunContext& ctx, const std::filesystem::path& checkpoint,
                   const std::filesystem::path& data_dir, const std::filesystem::path& out_dir);

/// Scores one image, a plain image folder, or a dataset root (its test split,
/// with labels). Writes scores.csv; optional per-image PNG intermediates.
void cmd_detect(const RunContext& ctx, const std::filesystem::path& checkpoint,
                const std::filesystem::path& template_file, const std::filesystem::path& input,
                const std::filesystem::path& out_dir,
                const std::optional<std::filesystem::path>& debug_dir = std::nullopt);

/// (tau, th) grid search over the config sweep ranges; writes sweep.csv/.md.
SweepTable cmd_sweep(const RunContext& ctx, const std::filesystem::path& checkpoint,
                     const std::filesystem::path& template_file, const std::filesystem::path& data_dir,
                     const std::filesystem::path& out_dir);

/// Three-mode ablation; writes ablation.csv/.md.
AblationResult cmd_ablate(const RunContext& ctx, const std::filesystem::path& checkpoint,
                          const std::filesystem::path& template_file,
                          const std::filesystem::path& data_dir, const std::filesystem::path& out_dir);

struct ExperimentResult {
  SweepTable sweep;
  AblationResult ablation;
};

/// gen -> train -> templates -> sweep -> ablate under one directory:
/// corpus/, model/, template/, sweep/, ablation/ plus a top-level manifest.
ExperimentResult cmd_experiment(const RunContext& ctx, const std::filesystem::path& out_dir);

/// Loads the template recorded by cmd_templates and rebuilds its
/// reconstruction with `model`.
NormalTemplate load_template(const std::filesystem::path& template_file, const ModelWeights& model);

nlohmann::json make_manifest(const RunContext& ctx, const std::string& command,
                             const nlohmann::json& inputs);
void write_manifest(const nlohmann::json& manifest, const std::filesystem::path& out_dir);

}  // namespace tfr
