/**
 * @file detector.hpp
 * @brief Defect scoring against a normal reconstructed template.
 *
 * Per image: reconstruct -> grayscale -> high-pass(tau) -> |input - template|
 * on the interior window (times `scale`) -> strict threshold at th -> count.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tfr/autoencoder.hpp"
#include "tfr/dataset.hpp"
#include "tfr/image.hpp"

namespace tfr {

struct DetectionParams {
  int tau = 3;
  double th = 4.0;
  int border = 10;
  double scale = 255.0;

  /// Checks 0 <= tau <= side, th >= 0, border >= 0, 2 * border < side.
  void validate(int side) const;
};

struct BinaryMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

struct ScoreRecord {
  std::string image_id;
  Label label = Label::kUnknown;
  std::int64_t raw_count = 0;
  std::optional<double> normalized;
};

class NormalTemplate {
 public:
  NormalTemplate() = default;
  NormalTemplate(std::string source_id, ImageTensor source, ImageTensor reconstruction);

  const std::string& source_id() const { return source_id_; }
  /// Grayscale of the raw source image.
  const ImageTensor& source() const { return source_; }
  /// Grayscale model reconstruction of the source image.
  const ImageTensor& reconstruction() const { return reconstruction_; }

  /// Recomputes the filtered field if tau differs from the cached one.
  void bind(int tau);
  std::optional<int> bound_tau() const { return tau_; }
  /// Filtered reconstruction at the bound tau; throws if unbound.
  const Field& filtered() const;

 private:
  std::string source_id_;
  ImageTensor source_;
  ImageTensor reconstruction_;
  std::optional<int> tau_;
  Field filtered_;
};

/// forward() followed by to_grayscale().
ImageTensor reconstruct_gray(const ModelWeights& model, const ImageTensor& image);

/// One template per image, unbound. Throws kEmptyInput on an empty list.
std::vector<NormalTemplate> build_templates(const ModelWeights& model,
                                            std::span<const NamedImage> normal_images);

struct TemplateSelection {
  std::size_t index = 0;
  std::vector<double> mean_counts;  // per candidate, over the holdouts
};

/// Picks the candidate minimizing mean raw_count over the holdout normals;
/// ties go to the lexicographically smallest source_id.
TemplateSelection rank_templates(std::span<const NormalTemplate> templates,
                                 std::span<const ImageTensor> holdout_normals,
                                 const ModelWeights& model, const DetectionParams& params,
                                 int threads = 1);

/// The selected template, bound to params.tau.
NormalTemplate select_template(std::span<const NormalTemplate> templates,
                               std::span<const ImageTensor> holdout_normals,
                               const ModelWeights& model, const DetectionParams& params,
                               int threads = 1);

/// |a - b| * scale on the interior window; the result is
/// (H - 2 border) x (W - 2 border).
Field difference_map(const Field& filtered_input, const Field& filtered_template,
                     const DetectionParams& params);

/// 1 where value > th.
BinaryMap binarize(const Field& diff, double th);

std::int64_t defect_score(const BinaryMap& map);

/// Number of interior difference values strictly above th; equals
/// defect_score(binarize(diff, th)) without materializing the map.
std::int64_t count_above(const Field& diff, double th);

/// Min-max over the corpus; all zeros when max == min. Throws kEmptyInput.
std::vector<ScoreRecord> normalize_scores(std::vector<ScoreRecord> records);

struct DetectionTrace {
  ImageTensor reconstruction;
  Field filtered;
  Field difference;
  BinaryMap binary;
};

/// Scores one image. `tmpl` is bound to params.tau if needed. The optional
/// trace receives the intermediate fields.
ScoreRecord detect(const NamedImage& image, const ModelWeights& model, NormalTemplate& tmpl,
                   const DetectionParams& params, DetectionTrace* trace = nullptr);

/// Scores a list of images (parallel over images) and normalizes.
std::vector<ScoreRecord> score_corpus(std::span<const NamedImage> images, const ModelWeights& model,
                                      NormalTemplate& tmpl, const DetectionParams& params,
                                      int threads = 1);

/// CSV `image_id,label,raw_count,normalized`.
void write_scores_csv(std::span<const ScoreRecord> records, const std::filesystem::path& path);

}  // namespace tfr
