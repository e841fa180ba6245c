/**
 * @file image.hpp
 * @brief Image raster, real-valued fields, file I/O and augmentation.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "tfr/rng.hpp"

namespace tfr {

/**
 * H x W x C raster with values in [0, 1].
 *
 * Storage is row-major and channel-interleaved: element (y, x, c) lives at
 * `(y * width + x) * channels + c`. Channels is 1 (gray) or 3 (RGB).
 */
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, double fill = 0.0);
  /// Throws kShapeMismatch on size mismatch, kInvalidArgument on values
  /// outside [0, 1] or non-finite.
  ImageTensor(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }
  double& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }

  std::span<const double> data() const { return data_; }
  /// Mutable access; callers keep values in [0, 1] (see clamp()).
  std::span<double> data() { return data_; }

  void clamp();
  bool same_shape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Single-channel real field without a range constraint (spectral magnitudes,
/// difference maps). Row-major.
struct Field {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Field() = default;
  Field(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const Field&, const Field&) = default;
};

/// Copies a single-channel image into a Field.
Field to_field(const ImageTensor& gray);
/// Clamps to [0, 1] and wraps as a gray image.
ImageTensor to_image(const Field& field);
/// Min-max rescale to [0, 1]; a constant field maps to all zeros.
ImageTensor normalized_image(const Field& field);

// ---------------------------------------------------------------------------
// File I/O

/// Loads an 8-bit PNG, or binary PGM/PPM with maxval 255.
/// Errors: kFileNotFound, kUnsupportedFormat, kCorruptData.
ImageTensor load_image(const std::filesystem::path& path);

/// Writes an 8-bit file, format chosen by extension (.png, .pgm/.ppm/.pnm).
/// Quantization is round-half-up of value * 255. Errors: kIo, kUnsupportedFormat.
void save_image(const ImageTensor& image, const std::filesystem::path& path);

std::uint8_t quantize(double value);

// ---------------------------------------------------------------------------
// Color and geometry

/// Rec.601 luma for RGB; gray input is returned unchanged.
ImageTensor to_grayscale(const ImageTensor& image);
/// Replicates a gray image into 3 channels; RGB input is returned unchanged.
ImageTensor to_rgb(const ImageTensor& image);
/// Converts to the requested channel count (1 or 3).
ImageTensor with_channels(const ImageTensor& image, int channels);

ImageTensor flip_horizontal(const ImageTensor& image);
ImageTensor flip_vertical(const ImageTensor& image);

struct AugmentSpec {
  double shear_range = 0.2;
  double zoom_range = 0.2;
  bool horizontal_flip = true;
  bool vertical_flip = true;
  std::uint64_t seed = 0;

  static AugmentSpec identity() { return {0.0, 0.0, false, false, 0}; }
  void validate() const;
};

/// Random x-shear, then random zoom about the image center, then independent
/// 50% flips. Bilinear resampling with nearest-edge fill; output clamped.
/// `spec.seed` is not consumed here; the caller owns the stream.
ImageTensor augment(const ImageTensor& image, const AugmentSpec& spec, Rng& rng);

/// The deterministic part of augment(): shear factor along x, zoom factor,
/// both about the image center.
ImageTensor affine_resample(const ImageTensor& image, double shear, double zoom);

}  // namespace tfr
