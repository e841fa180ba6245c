#include "tfr/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tfr/error.hpp"

namespace tfr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "file not found";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kCorruptData: return "corrupt data";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kTruncated: return "truncated file";
    case ErrorCode::kConfig: return "config error";
  }
  return "unknown error";
}

namespace {

void check_dims(int height, int width, int channels) {
  require(height > 0 && width > 0, ErrorCode::kInvalidArgument,
          "image dimensions must be positive");
  require(channels == 1 || channels == 3, ErrorCode::kInvalidArgument,
          "image channels must be 1 or 3, got " + std::to_string(channels));
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, channels);
  require(std::isfinite(fill) && fill >= 0.0 && fill <= 1.0,
          ErrorCode::kInvalidArgument, "fill value outside [0,1]");
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_dims(height, width, channels);
  require(data_.size() == static_cast<std::size_t>(height) * width * channels,
          ErrorCode::kShapeMismatch, "image data length does not match dimensions");
  for (double v : data_) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::kInvalidArgument,
            "image value outside [0,1]");
  }
}

void ImageTensor::clamp() {
  for (double& v : data_) {
    v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  }
}

Field to_field(const ImageTensor& gray) {
  require(gray.channels() == 1, ErrorCode::kShapeMismatch,
          "expected a single-channel image");
  Field f(gray.height(), gray.width());
  std::copy(gray.data().begin(), gray.data().end(), f.data.begin());
  return f;
}

ImageTensor to_image(const Field& field) {
  std::vector<double> v(field.data);
  for (double& x : v) x = std::isfinite(x) ? std::clamp(x, 0.0, 1.0) : 0.0;
  return ImageTensor(field.height, field.width, 1, std::move(v));
}

ImageTensor normalized_image(const Field& field) {
  ImageTensor out(field.height, field.width, 1);
  if (field.data.empty()) return out;
  auto [lo, hi] = std::minmax_element(field.data.begin(), field.data.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  auto dst = out.data();
  for (std::size_t i = 0; i < field.data.size(); ++i) {
    dst[i] = std::clamp((field.data[i] - *lo) / range, 0.0, 1.0);
  }
  return out;
}

ImageTensor to_grayscale(const ImageTensor& image) {
  if (image.channels() == 1) return image;
  ImageTensor out(image.height(), image.width(), 1);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double luma = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) +
                          0.114 * image.at(y, x, 2);
      out.at(y, x) = std::clamp(luma, 0.0, 1.0);
    }
  }
  return out;
}

ImageTensor to_rgb(const ImageTensor& image) {
  if (image.channels() == 3) return image;
  ImageTensor out(image.height(), image.width(), 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, x);
    }
  }
  return out;
}

ImageTensor with_channels(const ImageTensor& image, int channels) {
  if (channels == 1) return to_grayscale(image);
  if (channels == 3) return to_rgb(image);
  fail(ErrorCode::kInvalidArgument, "channels must be 1 or 3");
}

ImageTensor flip_horizontal(const ImageTensor& image) {
  ImageTensor out = image;
  const int w = image.width();
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < image.channels(); ++c) out.at(y, x, c) = image.at(y, w - 1 - x, c);
    }
  }
  return out;
}

ImageTensor flip_vertical(const ImageTensor& image) {
  ImageTensor out = image;
  const int h = image.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) out.at(y, x, c) = image.at(h - 1 - y, x, c);
    }
  }
  return out;
}

void AugmentSpec::validate() const {
  require(shear_range >= 0.0 && shear_range < 1.0, ErrorCode::kInvalidArgument,
          "shear_range must be in [0,1)");
  require(zoom_range >= 0.0 && zoom_range < 1.0, ErrorCode::kInvalidArgument,
          "zoom_range must be in [0,1)");
}

ImageTensor affine_resample(const ImageTensor& image, double shear, double zoom) {
  if (shear == 0.0 && zoom == 1.0) return image;
  require(zoom > 0.0, ErrorCode::kInvalidArgument, "zoom factor must be positive");

  const int h = image.height();
  const int w = image.width();
  const int ch = image.channels();
  const double cx = 0.5 * (w - 1);
  const double cy = 0.5 * (h - 1);
  ImageTensor out(h, w, ch);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse map: undo zoom, then undo the x-shear.
      const double v = cy + (y - cy) / zoom;
      const double u = cx + (x - cx) / zoom;
      double sx = u - shear * (v - cy);
      double sy = v;
      sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - fx) * image.at(y0, x0, c) + fx * image.at(y0, x1, c);
        const double bottom = (1.0 - fx) * image.at(y1, x0, c) + fx * image.at(y1, x1, c);
        out.at(y, x, c) = std::clamp((1.0 - fy) * top + fy * bottom, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImageTensor augment(const ImageTensor& image, const AugmentSpec& spec, Rng& rng) {
  spec.validate();
  const double shear = rng.uniform(-spec.shear_range, spec.shear_range);
  const double zoom = rng.uniform(1.0 - spec.zoom_range, 1.0 + spec.zoom_range);
  ImageTensor out = affine_resample(image, shear, zoom);
  if (spec.horizontal_flip && rng.coin()) out = flip_horizontal(out);
  if (spec.vertical_flip && rng.coin()) out = flip_vertical(out);
  return out;
}

}  // namespace tfr
