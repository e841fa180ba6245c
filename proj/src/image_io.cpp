#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tfr/error.hpp"
#include "tfr/image.hpp"

namespace tfr {

namespace fs = std::filesystem;

std::uint8_t quantize(double value) {
  const double scaled = std::floor(std::clamp(value, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

namespace {

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageTensor from_bytes(int height, int width, int channels, const unsigned char* bytes) {
  std::vector<double> data(static_cast<std::size_t>(height) * width * channels);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = bytes[i] / 255.0;
  return ImageTensor(height, width, channels, std::move(data));
}

std::vector<unsigned char> to_bytes(const ImageTensor& image) {
  std::vector<unsigned char> bytes(image.size());
  auto src = image.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize(src[i]);
  return bytes;
}

ImageTensor decode_png(const fs::path& path, const std::vector<unsigned char>& buffer) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, buffer.data(), buffer.size())) {
    const std::string why = png.message;
    png_image_free(&png);
    fail(ErrorCode::kCorruptData, path.string() + ": " + why);
  }
  const int channels = (png.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  png.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
    const std::string why = png.message;
    png_image_free(&png);
    fail(ErrorCode::kCorruptData, path.string() + ": " + why);
  }
  const int height = static_cast<int>(png.height);
  const int width = static_cast<int>(png.width);
  png_image_free(&png);
  return from_bytes(height, width, channels, pixels.data());
}

// Binary PNM (P5 gray / P6 RGB) with maxval 255.
ImageTensor decode_pnm(const fs::path& path, const std::vector<unsigned char>& buffer) {
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    for (;;) {
      while (pos < buffer.size() && std::isspace(buffer[pos])) ++pos;
      if (pos < buffer.size() && buffer[pos] == '#') {
        while (pos < buffer.size() && buffer[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= buffer.size() || !std::isdigit(buffer[pos])) {
      fail(ErrorCode::kCorruptData, path.string() + ": malformed PNM header");
    }
    long value = 0;
    while (pos < buffer.size() && std::isdigit(buffer[pos])) {
      value = value * 10 + (buffer[pos] - '0');
      if (value > (1L << 24)) fail(ErrorCode::kCorruptData, path.string() + ": header value too large");
      ++pos;
    }
    return value;
  };

  const int channels = buffer[1] == '6' ? 3 : 1;
  const long width = next_int();
  const long height = next_int();
  const long maxval = next_int();
  if (maxval != 255) {
    fail(ErrorCode::kUnsupportedFormat, path.string() + ": only maxval 255 is supported");
  }
  if (width <= 0 || height <= 0) fail(ErrorCode::kCorruptData, path.string() + ": bad dimensions");
  if (pos >= buffer.size() || !std::isspace(buffer[pos])) {
    fail(ErrorCode::kCorruptData, path.string() + ": malformed PNM header");
  }
  ++pos;
  const std::size_t needed = static_cast<std::size_t>(width) * height * channels;
  if (buffer.size() - pos < needed) {
    fail(ErrorCode::kCorruptData, path.string() + ": pixel data truncated");
  }
  return from_bytes(static_cast<int>(height), static_cast<int>(width), channels,
                    buffer.data() + pos);
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

ImageTensor load_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    fail(ErrorCode::kFileNotFound, "no such image file: " + path.string());
  }
  const auto buffer = read_all(path);
  static constexpr std::array<unsigned char, 8> kPngMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (buffer.size() >= kPngMagic.size() &&
      std::equal(kPngMagic.begin(), kPngMagic.end(), buffer.begin())) {
    return decode_png(path, buffer);
  }
  if (buffer.size() >= 2 && buffer[0] == 'P' && (buffer[1] == '5' || buffer[1] == '6')) {
    return decode_pnm(path, buffer);
  }
  fail(ErrorCode::kUnsupportedFormat, path.string() + ": not a PNG or binary PGM/PPM file");
}

void save_image(const ImageTensor& image, const fs::path& path) {
  require(!image.empty(), ErrorCode::kInvalidArgument, "cannot save an empty image");
  const std::string ext = lower_extension(path);
  const auto bytes = to_bytes(image);

  if (ext == ".png") {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    // Encode in memory so the byte stream does not depend on stdio buffering.
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
      fail(ErrorCode::kIo, path.string() + ": " + png.message);
    }
    std::vector<unsigned char> encoded(size);
    if (!png_image_write_to_memory(&png, encoded.data(), &size, 0, bytes.data(), 0, nullptr)) {
      fail(ErrorCode::kIo, path.string() + ": " + png.message);
    }
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(size));
    if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
    return;
  }

  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    std::ofstream out(path, std::ios::binary);
    out << (image.channels() == 3 ? "P6" : "P5") << '\n'
        << image.width() << ' ' << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
    return;
  }

  fail(ErrorCode::kUnsupportedFormat, "unsupported output extension: " + path.string());
}

}  // namespace tfr
