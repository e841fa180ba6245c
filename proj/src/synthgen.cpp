#include "tfr/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "tfr/error.hpp"
#include "tfr/rng.hpp"

namespace tfr {

namespace fs = std::filesystem;

std::string_view to_string(TextureBase base) {
  switch (base) {
    case TextureBase::kStripes: return "stripes";
    case TextureBase::kChecker: return "checker";
    case TextureBase::kSinusoidGrid: return "sinusoid-grid";
  }
  return "unknown";
}

std::string_view to_string(DefectKind kind) {
  switch (kind) {
    case DefectKind::kBlob: return "blob";
    case DefectKind::kScratch: return "scratch";
  }
  return "unknown";
}

TextureBase parse_texture_base(std::string_view name) {
  if (name == "stripes") return TextureBase::kStripes;
  if (name == "checker") return TextureBase::kChecker;
  if (name == "sinusoid-grid") return TextureBase::kSinusoidGrid;
  fail(ErrorCode::kInvalidArgument, "unknown texture base '" + std::string(name) +
                                        "' (expected stripes, checker or sinusoid-grid)");
}

DefectKind parse_defect_kind(std::string_view name) {
  if (name == "blob") return DefectKind::kBlob;
  if (name == "scratch") return DefectKind::kScratch;
  fail(ErrorCode::kInvalidArgument, "unknown defect kind '" + std::string(name) + "' (expected blob or scratch)");
}

void TextureSpec::validate() const {
  require(size >= 4 && size % 4 == 0, ErrorCode::kInvalidArgument,
          "texture size must be a positive multiple of 4");
  require(period >= 2, ErrorCode::kInvalidArgument, "texture period must be >= 2");
  require(noise_amplitude >= 0.0 && noise_amplitude < 0.5, ErrorCode::kInvalidArgument,
          "noise_amplitude must be in [0, 0.5)");
}

void DefectSpec::validate(int image_size) const {
  require(extent >= 1, ErrorCode::kInvalidArgument, "defect extent must be >= 1");
  require(2 * extent < image_size, ErrorCode::kInvalidArgument, "defect extent must be < size/2");
  require(contrast >= 0.0 && contrast <= 1.0, ErrorCode::kInvalidArgument,
          "defect contrast must be in [0, 1]");
  require(count >= 1, ErrorCode::kInvalidArgument, "defect count must be >= 1");
  require(margin >= 0, ErrorCode::kInvalidArgument, "defect margin must be >= 0");
  require(image_size - 2 * margin >= extent + 2, ErrorCode::kInvalidArgument,
          "defect extent does not fit inside the interior window");
}

ImageTensor gen_texture(const TextureSpec& spec) {
  spec.validate();
  const int n = spec.size;
  const double p = spec.period;
  const int half = std::max(1, spec.period / 2);
  ImageTensor img(n, n, 1);
  Rng rng(spec.seed);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double base = 0.5;
      switch (spec.base) {
        case TextureBase::kStripes:
          base = ((y % spec.period) < half) ? 0.3 : 0.7;
          break;
        case TextureBase::kChecker:
          base = (((x / half) + (y / half)) % 2 == 0) ? 0.3 : 0.7;
          break;
        case TextureBase::kSinusoidGrid:
          base = 0.5 + 0.2 * (std::cos(2.0 * std::numbers::pi * x / p) +
                              std::cos(2.0 * std::numbers::pi * y / p));
          break;
      }
      const double noise = spec.noise_amplitude > 0.0
                               ? rng.uniform(-spec.noise_amplitude, spec.noise_amplitude)
                               : 0.0;
      img.at(y, x) = std::clamp(base + noise, 0.0, 1.0);
    }
  }
  return img;
}

namespace {

// Squared distance from point (px, py) to segment (ax, ay)-(bx, by).
double segment_distance2(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return dx * dx + dy * dy;
}

}  // namespace

DefectResult inject_defect(const ImageTensor& image, const DefectSpec& spec) {
  require(image.height() == image.width(), ErrorCode::kShapeMismatch, "inject_defect expects a square image");
  spec.validate(image.height());
  const int n = image.height();
  Rng rng(spec.seed);

  DefectResult result{image, ImageTensor(n, n, 1)};
  const double radius = 0.5 * spec.extent;
  // Keep every shape pixel inside [margin, n - margin).
  const double lo = spec.margin + radius;
  const double hi = n - spec.margin - 1 - radius;

  for (int d = 0; d < spec.count; ++d) {
    const double cx = rng.uniform(lo, hi);
    const double cy = rng.uniform(lo, hi);
    const double target = rng.coin() ? 1.0 : 0.0;
    double ax = cx, ay = cy, bx = cx, by = cy;
    if (spec.kind == DefectKind::kScratch) {
      const double angle = rng.uniform(0.0, std::numbers::pi);
      ax = cx - radius * std::cos(angle) * 0.9;
      ay = cy - radius * std::sin(angle) * 0.9;
      bx = cx + radius * std::cos(angle) * 0.9;
      by = cy + radius * std::sin(angle) * 0.9;
    }
    for (int y = spec.margin; y < n - spec.margin; ++y) {
      for (int x = spec.margin; x < n - spec.margin; ++x) {
        bool inside = false;
        if (spec.kind == DefectKind::kBlob) {
          const double dx = x - cx, dy = y - cy;
          inside = dx * dx + dy * dy <= radius * radius;
        } else {
          inside = segment_distance2(x, y, ax, ay, bx, by) <= 1.0;
        }
        if (!inside) continue;
        result.mask.at(y, x) = 1.0;
        for (int c = 0; c < image.channels(); ++c) {
          double& v = result.image.at(y, x, c);
          v = std::clamp((1.0 - spec.contrast) * v + spec.contrast * target, 0.0, 1.0);
        }
      }
    }
  }
  return result;
}

TextureSpec corpus_texture(const TextureSpec& texture, int stream, int index) {
  TextureSpec spec = texture;
  spec.seed = derive_seed(texture.seed, static_cast<std::uint64_t>(stream), static_cast<std::uint64_t>(index));
  return spec;
}

DefectSpec corpus_defect(const DefectSpec& defect, int index) {
  DefectSpec spec = defect;
  spec.seed = derive_seed(defect.seed, 100, static_cast<std::uint64_t>(index));
  return spec;
}

CorpusSummary gen_corpus(const fs::path& out_dir, const TextureSpec& texture, const DefectSpec& defect,
                         const CorpusCounts& counts) {
  texture.validate();
  defect.validate(texture.size);
  require(counts.n_train >= 1 && counts.n_test_normal >= 1 && counts.n_test_defect >= 1,
          ErrorCode::kInvalidArgument, "corpus counts must be >= 1");

  const fs::path train = out_dir / "train" / "good";
  const fs::path test_good = out_dir / "test" / "good";
  const fs::path test_defect = out_dir / "test" / "defect";
  const fs::path ground_truth = out_dir / "ground_truth" / "defect";
  std::error_code ec;
  for (const auto& dir : {train, test_good, test_defect, ground_truth}) {
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }

  auto name = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", i);
    return std::string(buf);
  };

  CorpusSummary summary;
  for (int i = 0; i < counts.n_train; ++i) {
    const fs::path p = train / (name(i) + ".png");
    save_image(gen_texture(corpus_texture(texture, 0, i)), p);
    summary.train.push_back(p);
  }
  for (int i = 0; i < counts.n_test_normal; ++i) {
    const fs::path p = test_good / (name(i) + ".png");
    save_image(gen_texture(corpus_texture(texture, 1, i)), p);
    summary.test_normal.push_back(p);
  }
  for (int i = 0; i < counts.n_test_defect; ++i) {
    const DefectResult r = inject_defect(gen_texture(corpus_texture(texture, 2, i)), corpus_defect(defect, i));
    const fs::path p = test_defect / (name(i) + ".png");
    const fs::path m = ground_truth / (name(i) + "_mask.png");
    save_image(r.image, p);
    save_image(r.mask, m);
    summary.test_defect.push_back(p);
    summary.masks.push_back(m);
  }
  return summary;
}

}  // namespace tfr
