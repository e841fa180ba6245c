#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "tfr/image.hpp"

namespace tfr {

enum class TextureBase { kStripes, kChecker, kSinusoidGrid };
enum class DefectKind { kBlob, kScratch };

std::string_view to_string(TextureBase base);
std::string_view to_string(DefectKind kind);
TextureBase parse_texture_base(std::string_view name);
DefectKind parse_defect_kind(std::string_view name);

struct TextureSpec {
  int size = 64;
  TextureBase base = TextureBase::kSinusoidGrid;
  int period = 8;
  double noise_amplitude = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DefectSpec {
  DefectKind kind = DefectKind::kBlob;
  int extent = 8;          // blob diameter or scratch length, pixels
  double contrast = 0.4;   // blend weight toward the defect intensity
  int count = 1;
  int margin = 10;         // defects stay this far from every edge
  std::uint64_t seed = 0;

  void validate(int image_size) const;
};

/**
 * Base pattern (gray, values in [0.1, 0.9] before noise):
 *   stripes       horizontal bands, rows repeat every `period`
 *   checker       squares of side period/2
 *   sinusoid-grid 0.5 + 0.2 (cos(2 pi x / p) + cos(2 pi y / p))
 * plus uniform noise in [-a, a], clamped to [0, 1].
 */
ImageTensor gen_texture(const TextureSpec& spec);

struct DefectResult {
  ImageTensor image;
  ImageTensor mask;  // 1 on altered pixels, 0 elsewhere
};

/// Blends each defect shape toward a dark or bright target:
/// out = (1 - contrast) * in + contrast * target. Shapes lie fully inside the
/// margin frame. Throws kInvalidArgument if the extent cannot fit.
DefectResult inject_defect(const ImageTensor& image, const DefectSpec& spec);

struct CorpusCounts {
  int n_train = 10;
  int n_test_normal = 5;
  int n_test_defect = 5;
};

struct CorpusSummary {
  std::vector<std::filesystem::path> train;
  std::vector<std::filesystem::path> test_normal;
  std::vector<std::filesystem::path> test_defect;
  std::vector<std::filesystem::path> masks;
};

/// Per-image texture seed for split `stream` (0 train, 1 test normal,
/// 2 test defect) and index; defect placement uses a separate stream.
TextureSpec corpus_texture(const TextureSpec& texture, int stream, int index);
DefectSpec corpus_defect(const DefectSpec& defect, int index);

/// Writes <out>/train/good, <out>/test/good, <out>/test/defect and
/// <out>/ground_truth/defect/<name>_mask.png. Seeds derive from
/// texture.seed (textures) and defect.seed (placement).
CorpusSummary gen_corpus(const std::filesystem::path& out_dir, const TextureSpec& texture,
                         const DefectSpec& defect, const CorpusCounts& counts);

}  // namespace tfr
