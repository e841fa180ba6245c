// Checkpoint layout (all integers u32 little-endian, reals IEEE-754 binary64
// little-endian):
//
//   "TFR1"
//   input_height, input_width, input_channels, kernel_size, depth,
//   encoder_channels[depth]
//   per layer in parameter order: weight[out*in*k*k], bias[out]
//   adam step (u64)
//   first moments per layer (weight, bias), then second moments likewise

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tfr/autoencoder.hpp"
#include "tfr/error.hpp"

namespace tfr {

namespace {

constexpr char kMagic[4] = {'T', 'F', 'R', '1'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void reals(const RealVec& values) {
    for (double d : values) u64(std::bit_cast<std::uint64_t>(d));
  }
  void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<char>& bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  std::uint64_t unsigned_le(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
  std::uint64_t u64() { return unsigned_le(8); }
  void reals(RealVec& values) {
    for (double& d : values) d = std::bit_cast<double>(u64());
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::kTruncated, name_ + ": checkpoint is truncated");
  }

  const std::vector<char>& bytes_;
  std::string name_;
  std::size_t pos_ = 4;
};

}  // namespace

void save_checkpoint(const ModelWeights& model, const std::filesystem::path& path) {
  Writer w;
  w.raw(kMagic, 4);
  const auto& a = model.arch;
  w.u32(static_cast<std::uint32_t>(a.input_height));
  w.u32(static_cast<std::uint32_t>(a.input_width));
  w.u32(static_cast<std::uint32_t>(a.input_channels));
  w.u32(static_cast<std::uint32_t>(a.kernel_size));
  w.u32(static_cast<std::uint32_t>(a.depth()));
  for (int c : a.encoder_channels) w.u32(static_cast<std::uint32_t>(c));
  for (const auto& layer : model.layers) {
    w.reals(layer.weight);
    w.reals(layer.bias);
  }
  w.u64(static_cast<std::uint64_t>(model.adam.step));
  for (const ParamSet* set : {&model.adam.first_moment, &model.adam.second_moment}) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      w.reals(set->weight[l]);
      w.reals(set->bias[l]);
    }
  }
  std::ofstream out(path, std::ios::binary);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) fail(ErrorCode::kIo, "cannot write checkpoint " + path.string());
}

ModelWeights load_checkpoint(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorCode::kFileNotFound, "no such checkpoint: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  const std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const std::string name = path.string();

  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 3) != 0) {
    fail(ErrorCode::kFormat, name + ": not a checkpoint (bad magic)");
  }
  if (bytes[3] != kMagic[3]) {
    fail(ErrorCode::kVersionMismatch, name + ": unsupported checkpoint version '" +
                                          std::string(1, bytes[3]) + "'");
  }

  Reader r(bytes, name);
  ArchitectureDescriptor arch;
  arch.input_height = static_cast<int>(r.u32());
  arch.input_width = static_cast<int>(r.u32());
  arch.input_channels = static_cast<int>(r.u32());
  arch.kernel_size = static_cast<int>(r.u32());
  const std::uint32_t depth = r.u32();
  if (depth > 64) fail(ErrorCode::kFormat, name + ": implausible depth");
  arch.encoder_channels.resize(depth);
  for (auto& c : arch.encoder_channels) c = static_cast<int>(r.u32());
  try {
    arch.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, name + ": invalid architecture: " + e.what());
  }

  ModelWeights model = ModelWeights::zeros(arch);
  for (auto& layer : model.layers) {
    r.reals(layer.weight);
    r.reals(layer.bias);
  }
  model.adam.step = static_cast<std::int64_t>(r.u64());
  for (ParamSet* set : {&model.adam.first_moment, &model.adam.second_moment}) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      r.reals(set->weight[l]);
      r.reals(set->bias[l]);
    }
  }
  if (!r.at_end()) fail(ErrorCode::kFormat, name + ": trailing bytes after checkpoint payload");
  return model;
}

}  // namespace tfr
