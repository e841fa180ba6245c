#include "tfr/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tfr/error.hpp"

namespace tfr {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly, not by recurrence, to keep round-off flat.
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const Complex w(std::cos(angle), std::sin(angle));
      for (std::size_t i = 0; i < n; i += len) {
        const Complex u = a[i + k];
        const Complex t = w * a[i + k + half];
        a[i + k] = u + t;
        a[i + k + half] = u - t;
      }
    }
  }
}

void dft_direct(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t phase = (k * x) % n;
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n);
      acc += a[x] * Complex(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  a.swap(out);
}

// Row transforms followed by column transforms.
void transform2(std::vector<Complex>& data, int height, int width, bool inverse) {
  std::vector<Complex> line(static_cast<std::size_t>(width));
  for (int r = 0; r < height; ++r) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r) * width, width, line.begin());
    dft1(line, inverse);
    std::copy(line.begin(), line.end(), data.begin() + static_cast<std::ptrdiff_t>(r) * width);
  }
  line.resize(static_cast<std::size_t>(height));
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r) line[r] = data[static_cast<std::size_t>(r) * width + c];
    dft1(line, inverse);
    for (int r = 0; r < height; ++r) data[static_cast<std::size_t>(r) * width + c] = line[r];
  }
}

Spectrum roll(const Spectrum& in, int dy, int dx) {
  Spectrum out = in;
  for (int u = 0; u < in.height; ++u) {
    for (int v = 0; v < in.width; ++v) {
      out.at((u + dy) % in.height, (v + dx) % in.width) = in.at(u, v);
    }
  }
  return out;
}

}  // namespace

void dft1(std::vector<Complex>& data, bool inverse) {
  if (data.size() <= 1) return;
  if (is_pow2(data.size())) {
    fft_radix2(data, inverse);
  } else {
    dft_direct(data, inverse);
  }
}

Field ComplexField::modulus() const {
  Field f(height, width);
  for (std::size_t i = 0; i < data.size(); ++i) f.data[i] = std::abs(data[i]);
  return f;
}

Field ComplexField::real() const {
  Field f(height, width);
  for (std::size_t i = 0; i < data.size(); ++i) f.data[i] = data[i].real();
  return f;
}

std::size_t HighPassMask::removed() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{0}));
}

Spectrum dft2(const Field& field) {
  require(field.height >= 1 && field.height == field.width, ErrorCode::kShapeMismatch,
          "dft2 requires a square input, got " + std::to_string(field.height) + "x" +
              std::to_string(field.width));
  Spectrum s;
  s.height = field.height;
  s.width = field.width;
  s.data.assign(field.data.begin(), field.data.end());
  transform2(s.data, s.height, s.width, false);
  return s;
}

Spectrum dft2(const ImageTensor& image) {
  require(image.channels() == 1, ErrorCode::kShapeMismatch, "dft2 requires a single-channel image");
  return dft2(to_field(image));
}

ComplexField idft2(const Spectrum& spectrum) {
  require(!spectrum.centered, ErrorCode::kInvalidArgument,
          "idft2 requires an uncentered spectrum; call unshift first");
  ComplexField f;
  f.height = spectrum.height;
  f.width = spectrum.width;
  f.data = spectrum.data;
  transform2(f.data, f.height, f.width, true);
  const double scale = 1.0 / (static_cast<double>(f.height) * f.width);
  for (auto& z : f.data) z *= scale;
  return f;
}

Spectrum shift(const Spectrum& spectrum) {
  require(!spectrum.centered, ErrorCode::kInvalidArgument, "spectrum is already centered");
  Spectrum out = roll(spectrum, spectrum.height / 2, spectrum.width / 2);
  out.centered = true;
  return out;
}

Spectrum unshift(const Spectrum& spectrum) {
  require(spectrum.centered, ErrorCode::kInvalidArgument, "spectrum is not centered");
  Spectrum out = roll(spectrum, spectrum.height - spectrum.height / 2,
                      spectrum.width - spectrum.width / 2);
  out.centered = false;
  return out;
}

HighPassMask make_mask(int size, int tau) {
  require(size >= 1, ErrorCode::kInvalidArgument, "mask size must be >= 1");
  require(tau >= 0 && tau <= size, ErrorCode::kInvalidArgument,
          "tau must be in [0, " + std::to_string(size) + "], got " + std::to_string(tau));
  HighPassMask m;
  m.size = size;
  m.tau = tau;
  m.values.assign(static_cast<std::size_t>(size) * size, 1);
  const int start = size / 2 - tau / 2;
  for (int u = start; u < start + tau; ++u) {
    for (int v = start; v < start + tau; ++v) m.values[static_cast<std::size_t>(u) * size + v] = 0;
  }
  return m;
}

Spectrum apply_mask(const Spectrum& spectrum, const HighPassMask& mask) {
  require(spectrum.centered, ErrorCode::kInvalidArgument, "apply_mask requires a centered spectrum");
  require(spectrum.height == mask.size && spectrum.width == mask.size, ErrorCode::kShapeMismatch,
          "mask and spectrum dimensions differ");
  Spectrum out = spectrum;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (mask.values[i] == 0) out.data[i] = Complex(0.0, 0.0);
  }
  return out;
}

Field highpass_filter(const Field& image, int tau) {
  const Spectrum spectrum = dft2(image);
  const HighPassMask mask = make_mask(spectrum.height, tau);
  return idft2(unshift(apply_mask(shift(spectrum), mask))).modulus();
}

Field highpass_filter(const ImageTensor& image, int tau) {
  require(image.channels() == 1, ErrorCode::kShapeMismatch,
          "highpass_filter requires a single-channel image");
  return highpass_filter(to_field(image), tau);
}

ImageTensor spectrum_image(const Spectrum& spectrum) {
  Field f(spectrum.height, spectrum.width);
  for (std::size_t i = 0; i < spectrum.data.size(); ++i) f.data[i] = std::log1p(std::abs(spectrum.data[i]));
  const double peak = *std::max_element(f.data.begin(), f.data.end());
  if (peak > 0.0) {
    for (double& x : f.data) x /= peak;
  }
  return to_image(f);
}

}  // namespace tfr
