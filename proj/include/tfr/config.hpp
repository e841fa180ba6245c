#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"

#include "tfr/autoencoder.hpp"
#include "tfr/detector.hpp"
#include "tfr/synthgen.hpp"

namespace tfr {

struct TemplateOptions {
  int max_candidates = 0;  // 0 = every training image is a candidate
};

struct SweepRange {
  std::vector<int> tau = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<double> th = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
};

struct CorpusOptions {
  TextureSpec texture;
  DefectSpec defect;
  CorpusCounts counts;
};

/// Every tunable of a run. Defaults are the full-size profile: 256x256x3
/// input, ladder [64,128,256,512,512], Adam lr 1e-4, 500 epochs, batch 16,
/// L1/L2 weights 1/100, shear/zoom 0.2 with both flips, border 10.
struct RunConfig {
  ArchitectureDescriptor architecture;
  TrainConfig train;
  DetectionParams detection;
  TemplateOptions templates;
  SweepRange sweep;
  CorpusOptions corpus;
  std::uint64_t seed = 0;

  /// Section seeds derived from `seed`.
  std::uint64_t train_seed() const;
  std::uint64_t texture_seed() const;
  std::uint64_t defect_seed() const;
};

/// Parses and validates. Errors are kConfig with the offending field path,
/// e.g. "train.learning_rate: must be > 0". Unknown keys are rejected.
/// A run manifest (object with a "config" member) is accepted as well.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Full snapshot including defaults; parse_config(to_json(c)) restores every field.
nlohmann::json to_json(const RunConfig& config);

/// Validation used by parse_config; also usable on programmatic configs.
void validate_config(const RunConfig& config);

}  // namespace tfr
