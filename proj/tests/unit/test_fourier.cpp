#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "tfr/error.hpp"
#include "tfr/fourier.hpp"

using namespace tfr;

namespace {

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

std::size_t zeros(const HighPassMask& m) { return static_cast<std::size_t>(std::count(m.values.begin(), m.values.end(), 0)); }

}  // namespace

TEST_CASE("dft2 agrees with the double-sum oracle") {
  for (int n : {1, 2, 3, 4, 5, 6, 8, 12, 16}) {
    const Field f = oracle::random_field(n, n, static_cast<std::uint64_t>(n));
    const Spectrum s = dft2(f);
    const auto ref = oracle::naive_dft2(f);
    CHECK_FALSE(s.centered);
    double err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(s.data[i] - ref[i]));
    CHECK_MESSAGE(err < 1e-9, "n=" << n << " err=" << err);
  }
}

TEST_CASE("dft2 trivial signals") {
  const int n = 8;
  const Spectrum c = dft2(Field(n, n, 0.3));
  CHECK(std::abs(c.at(0, 0) - Complex(0.3 * n * n)) < 1e-12);
  for (std::size_t i = 1; i < c.data.size(); ++i) CHECK(std::abs(c.data[i]) < 1e-12);
  Field impulse(n, n);
  impulse.at(0, 0) = 1.0;
  for (const auto& v : dft2(impulse).data) CHECK(std::abs(v - Complex(1.0)) < 1e-12);
  CHECK_THROWS_AS(dft2(Field(4, 8)), Error);
  CHECK_THROWS_AS(dft2(ImageTensor(4, 4, 3)), Error);
}

TEST_CASE("round trip, parseval and linearity") {
  for (int n : {4, 8, 16, 32, 7}) {
    const Field f = oracle::random_field(n, n, 100 + static_cast<std::uint64_t>(n));
    const Spectrum s = dft2(f);
    const ComplexField back = idft2(s);
    double err = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i) err = std::max(err, std::abs(back.data[i] - Complex(f.data[i])));
    CHECK(err < 1e-9);
    double lhs = 0.0, rhs = 0.0;
    for (double v : f.data) lhs += v * v;
    for (const auto& v : s.data) rhs += std::norm(v);
    rhs /= static_cast<double>(n) * n;
    CHECK(std::abs(lhs - rhs) / lhs < 1e-6);
  }
  const Field x = oracle::random_field(8, 8, 1), y = oracle::random_field(8, 8, 2);
  Field combo(8, 8);
  for (std::size_t i = 0; i < combo.data.size(); ++i) combo.data[i] = 2.5 * x.data[i] - 0.75 * y.data[i];
  const Spectrum sx = dft2(x), sy = dft2(y), sc = dft2(combo);
  for (std::size_t i = 0; i < sc.data.size(); ++i) CHECK(std::abs(sc.data[i] - (2.5 * sx.data[i] - 0.75 * sy.data[i])) < 1e-9);

  Spectrum zero{4, 4, std::vector<Complex>(16), false};
  for (double v : idft2(zero).modulus().data) CHECK(v == 0.0);
  CHECK_THROWS_AS(idft2(shift(zero)), Error);
}

TEST_CASE("shift") {
  Field impulse(4, 4);
  impulse.at(0, 0) = 1.0;
  Spectrum s = dft2(impulse);
  s.data.assign(16, Complex(0.0));
  s.at(0, 0) = 1.0;
  const Spectrum c = shift(s);
  CHECK(c.centered);
  CHECK(c.at(2, 2) == Complex(1.0));
  CHECK(unshift(c).data == s.data);
  CHECK_THROWS_AS(shift(c), Error);
  CHECK_THROWS_AS(unshift(s), Error);

  Spectrum odd{5, 5, std::vector<Complex>(25), false};
  for (int i = 0; i < 25; ++i) odd.data[static_cast<std::size_t>(i)] = Complex(i, -i);
  const Spectrum oc = shift(odd);
  CHECK(oc.at(2, 2) == odd.at(0, 0));
  CHECK(oc.at(0, 0) == odd.at(3, 3));
  const Spectrum back = unshift(oc);
  CHECK(back.data == odd.data);
  CHECK_FALSE(back.centered);
}

TEST_CASE("mask geometry") {
  const HighPassMask m = make_mask(8, 2);
  CHECK(m.removed() == 4);
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      const bool inside = (u == 3 || u == 4) && (v == 3 || v == 4);
      CHECK(m.at(u, v) == (inside ? 0 : 1));
    }
  }
  CHECK(zeros(make_mask(8, 0)) == 0);
  CHECK(zeros(make_mask(8, 8)) == 64);
  CHECK(make_mask(5, 3).at(1, 1) == 0);
  CHECK(make_mask(5, 3).at(0, 0) == 1);
  CHECK_THROWS_AS(make_mask(8, 9), Error);
  CHECK_THROWS_AS(make_mask(8, -1), Error);
  for (int n : {7, 8}) {
    for (int t = 0; t < n; ++t) {
      const HighPassMask a = make_mask(n, t), b = make_mask(n, t + 1);
      CHECK(a.removed() == static_cast<std::size_t>(t * t));
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == 0) CHECK(b.values[i] == 0);
      }
    }
  }
}

TEST_CASE("apply_mask") {
  const Spectrum s = shift(dft2(oracle::random_field(8, 8, 3)));
  CHECK(apply_mask(s, make_mask(8, 0)).data == s.data);
  for (const auto& v : apply_mask(s, make_mask(8, 8)).data) CHECK(v == Complex(0.0));
  const Spectrum once = apply_mask(s, make_mask(8, 3));
  CHECK(apply_mask(once, make_mask(8, 3)).data == once.data);
  CHECK_THROWS_AS(apply_mask(s, make_mask(4, 1)), Error);
  CHECK_THROWS_AS(apply_mask(unshift(s), make_mask(8, 1)), Error);
}

TEST_CASE("highpass filter") {
  const Field f = oracle::random_field(16, 16, 8);
  CHECK(max_abs_diff(highpass_filter(f, 0), f) < 1e-9);
  for (double v : highpass_filter(f, 16).data) CHECK(v == 0.0);
  for (double v : highpass_filter(Field(16, 16, 0.7), 1).data) CHECK(v < 1e-12);
  for (double v : highpass_filter(f, 5).data) CHECK(v >= 0.0);

  const int n = 16;
  Field g(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) g.at(x, y) = 0.5 + 0.3 * std::cos(2.0 * std::numbers::pi * x / n);
  g.at(5, 9) += 0.4;
  const Field h = highpass_filter(g, 3);
  const auto peak = std::max_element(h.data.begin(), h.data.end()) - h.data.begin();
  CHECK(peak == 5 * n + 9);
}

TEST_CASE("spectrum image is normalized") {
  const ImageTensor img = spectrum_image(shift(dft2(oracle::random_field(8, 8, 4))));
  CHECK(img.channels() == 1);
  double lo = 1.0, hi = 0.0;
  for (double v : img.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi == 1.0);
}
