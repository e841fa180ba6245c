/**
 * @file fourier.hpp
 * @brief 2D DFT / inverse DFT, DC-centering shift, square low-frequency mask
 *        and the composed high-pass filter.
 *
 * Forward transform is unnormalized, the inverse carries 1/(H*W):
 *
 *   F(u,v) = sum_x sum_y f(x,y) exp(-j 2 pi (u x / H + v y / W))
 *   f(x,y) = 1/(H W) sum_u sum_v F(u,v) exp(+j 2 pi (u x / H + v y / W))
 *
 * with x, u indexing rows and y, v indexing columns.
 */
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "tfr/image.hpp"

namespace tfr {

using Complex = std::complex<double>;

struct Spectrum {
  int height = 0;
  int width = 0;
  std::vector<Complex> data;  // row-major
  bool centered = false;      // DC at (floor(H/2), floor(W/2)) when set

  Complex at(int u, int v) const { return data[static_cast<std::size_t>(u) * width + v]; }
  Complex& at(int u, int v) { return data[static_cast<std::size_t>(u) * width + v]; }
};

/// Complex spatial-domain result of the inverse transform.
struct ComplexField {
  int height = 0;
  int width = 0;
  std::vector<Complex> data;

  Complex at(int x, int y) const { return data[static_cast<std::size_t>(x) * width + y]; }
  /// Per-pixel modulus |f(x, y)|.
  Field modulus() const;
  Field real() const;
};

/// Square binary mask: 0 inside the removed tau x tau square
/// [c - floor(tau/2), c - floor(tau/2) + tau - 1]^2 with c = floor(size/2),
/// 1 elsewhere.
struct HighPassMask {
  int size = 0;
  int tau = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int u, int v) const { return values[static_cast<std::size_t>(u) * size + v]; }
  /// Count of zeroed bins.
  std::size_t removed() const;
};

/// Requires a square single-channel input. Throws kShapeMismatch otherwise.
Spectrum dft2(const Field& field);
Spectrum dft2(const ImageTensor& image);

/// Inverse of an uncentered spectrum. Throws kInvalidArgument if centered.
ComplexField idft2(const Spectrum& spectrum);

/// Moves DC to the center. Throws kInvalidArgument if already centered.
Spectrum shift(const Spectrum& spectrum);
/// Inverse of shift(). Throws kInvalidArgument if not centered.
Spectrum unshift(const Spectrum& spectrum);

/// Throws kInvalidArgument unless 0 <= tau <= size.
HighPassMask make_mask(int size, int tau);

/// Element-wise multiply of a centered spectrum by the mask.
Spectrum apply_mask(const Spectrum& spectrum, const HighPassMask& mask);

/// |idft2(unshift(apply_mask(shift(dft2(image)), make_mask(N, tau))))|
Field highpass_filter(const Field& image, int tau);
Field highpass_filter(const ImageTensor& image, int tau);

/// log(1 + |F|) scaled to [0, 1], for visual inspection of a spectrum.
ImageTensor spectrum_image(const Spectrum& spectrum);

/// In-place 1-D transform; radix-2 for powers of two, direct sum otherwise.
/// `inverse` flips the exponent sign and does not scale.
void dft1(std::vector<Complex>& data, bool inverse);

}  // namespace tfr
