#include <cmath>
#include <filesystem>
#include <fstream>

#include "checks.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "tfr/autoencoder.hpp"
#include "tfr/error.hpp"

namespace fs = std::filesystem;
using namespace tfr;

namespace {

ArchitectureDescriptor toy(int size = 8, int channels = 1) {
  ArchitectureDescriptor a;
  a.input_height = a.input_width = size;
  a.input_channels = channels;
  a.encoder_channels = {8, 16};
  return a;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tfr_test_ae";
  fs::create_directories(dir);
  return dir / name;
}

ErrorCode load_code(const fs::path& p) {
  try {
    load_checkpoint(p);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected tfr::Error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("recon_loss formula") {
  const ImageTensor x = oracle::random_image(4, 4, 1, 1);
  CHECK(recon_loss(x, x, 1, 100) == 0.0);
  CHECK(recon_loss(ImageTensor(3, 3, 1, 1.0), ImageTensor(3, 3, 1, 0.0), 1, 100) == doctest::Approx(101.0));
  CHECK(recon_loss(ImageTensor(1, 1, 1, 0.5), ImageTensor(1, 1, 1, 0.25), 1, 100) == doctest::Approx(6.5));
  CHECK(recon_loss(x, oracle::random_image(4, 4, 1, 2), 1, 100) > 0.0);
  CHECK_THROWS_AS(recon_loss(x, ImageTensor(4, 4, 3), 1, 1), Error);
}

TEST_CASE("architecture validation and shapes") {
  ArchitectureDescriptor a = toy(32);
  CHECK_NOTHROW(a.validate());
  const auto sizes = level_sizes(a);
  REQUIRE(sizes.size() == 2);
  CHECK(sizes[0] == std::pair{32, 32});
  CHECK(sizes[1] == std::pair{16, 16});
  a.encoder_channels = {8};
  CHECK_THROWS_AS(a.validate(), Error);
  a = toy(30);
  a.encoder_channels = {4, 4, 4};
  CHECK_THROWS_AS(a.validate(), Error);
}

TEST_CASE("parameter count of the toy architecture") {
  const auto m = ModelWeights::initialize(toy(32), 1);
  const std::size_t expected = (8 * 1 * 9 + 8) + (16 * 8 * 9 + 16) + (8 * 24 * 9 + 8) + (1 * 8 * 9 + 1);
  CHECK(expected == 3057);
  CHECK(m.parameter_count() == expected);
}

TEST_CASE("constant network outputs sigmoid of the final bias") {
  auto m = ModelWeights::zeros(toy(16));
  const ImageTensor x = oracle::random_image(16, 16, 1, 3);
  for (double v : forward(m, x).data()) CHECK(v == 0.5);
  m.layers.back().bias[0] = 1.25;
  const double expected = 1.0 / (1.0 + std::exp(-1.25));
  for (double v : forward(m, x).data()) CHECK(v == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("forward shape and range") {
  for (int c : {1, 3}) {
    ArchitectureDescriptor a = toy(16, c);
    a.encoder_channels = {4, 8, 8};
    const auto m = ModelWeights::initialize(a, 7);
    const ImageTensor x = oracle::random_image(16, 16, c, 4);
    const ImageTensor y = forward(m, x);
    CHECK(y.same_shape(x));
    for (double v : y.data()) CHECK((v > 0.0 && v < 1.0));
    CHECK_THROWS_AS(forward(m, ImageTensor(8, 8, c)), Error);
  }
}

TEST_CASE("batch forward equals per-image forward") {
  const auto m = ModelWeights::initialize(toy(8), 2);
  std::vector<ImageTensor> batch = {oracle::random_image(8, 8, 1, 1), oracle::random_image(8, 8, 1, 2)};
  const auto out = forward(m, batch);
  REQUIRE(out.size() == 2);
  CHECK(out[1] == forward(m, batch[1]));
}

TEST_CASE("backward") {
  const auto m = ModelWeights::initialize(toy(8), 11);
  std::vector<ImageTensor> batch = {oracle::random_image(8, 8, 1, 5), oracle::random_image(8, 8, 1, 6)};

  SUBCASE("zero loss weights give zero gradients") {
    const auto g = backward(m, batch, batch, {0.0, 0.0}).gradients;
    for (const auto& w : g.weight)
      for (double v : w) CHECK(v == 0.0);
    for (const auto& b : g.bias)
      for (double v : b) CHECK(v == 0.0);
  }
  SUBCASE("loss is the batch mean") {
    const auto r = backward(m, batch, batch, {1.0, 100.0});
    const double expected = 0.5 * (recon_loss(batch[0], forward(m, batch[0]), 1, 100) +
                                   recon_loss(batch[1], forward(m, batch[1]), 1, 100));
    CHECK(r.loss == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("dead relu unit has zero incoming kernel gradient") {
    auto dead = m;
    dead.layers[0].bias[0] = -100.0;
    const auto g = backward(dead, batch, batch, {1.0, 100.0}).gradients;
    for (int i = 0; i < 9; ++i) CHECK(g.weight[0][static_cast<std::size_t>(i)] == 0.0);
    CHECK(g.bias[0][0] == 0.0);
  }
  SUBCASE("gradients are independent of the thread count") {
    const auto a = backward(m, batch, batch, {1.0, 100.0}, 1);
    const auto b = backward(m, batch, batch, {1.0, 100.0}, 3);
    CHECK(a.gradients == b.gradients);
    CHECK(a.loss == b.loss);
  }
  SUBCASE("finite differences") {
    for (std::uint64_t seed : {11, 12, 13}) {
      const auto model = ModelWeights::initialize(toy(8), seed);
      const auto r = checks::gradient_check(model, {batch[0]}, {1.0, 100.0}, 1e-5, 1e-4);
      CHECK(r.checked == model.parameter_count());
      CHECK_MESSAGE(r.failures == 0, "seed " << seed << " max relative error " << r.max_rel_error);
    }
    ArchitectureDescriptor rgb = toy(8, 3);
    rgb.encoder_channels = {4, 4, 8};
    const auto r = checks::gradient_check(ModelWeights::initialize(rgb, 4), {oracle::random_image(8, 8, 3, 9)},
                                          {1.0, 100.0}, 1e-5, 1e-4);
    CHECK(r.failures == 0);
  }
}

TEST_CASE("adam") {
  auto m = ModelWeights::initialize(toy(8), 3);
  const double lr = 1e-3;

  SUBCASE("first step moves by lr against the gradient sign") {
    auto g = m.zeros_like();
    for (auto& w : g.weight) std::fill(w.begin(), w.end(), -0.37);
    for (auto& b : g.bias) std::fill(b.begin(), b.end(), -0.37);
    const auto before = m;
    adam_step(m, g, lr);
    CHECK(m.adam.step == 1);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      for (std::size_t i = 0; i < m.layers[l].weight.size(); ++i) {
        CHECK(m.layers[l].weight[i] - before.layers[l].weight[i] == doctest::Approx(lr * 0.37 / (0.37 + 1e-8)));
      }
    }
  }
  SUBCASE("zero gradients keep parameters and decay moments") {
    auto g = m.zeros_like();
    for (auto& w : g.weight) std::fill(w.begin(), w.end(), 0.5);
    adam_step(m, g, lr);
    const auto after_first = m;
    adam_step(m, m.zeros_like(), lr);
    CHECK(m.adam.step == 2);
    const double m1 = after_first.adam.first_moment.weight[0][0];
    CHECK(m.adam.first_moment.weight[0][0] == doctest::Approx(0.9 * m1));
    CHECK(m.adam.second_moment.weight[0][0] ==
          doctest::Approx(0.999 * after_first.adam.second_moment.weight[0][0]));
    auto unchanged = ModelWeights::initialize(toy(8), 3);
    const auto ref = unchanged;
    adam_step(unchanged, unchanged.zeros_like(), lr);
    CHECK(unchanged.layers == ref.layers);
  }
  SUBCASE("matches a scalar reference over several steps") {
    oracle::ScalarAdam ref;
    double p = m.layers[1].weight[5];
    const double grads[] = {0.3, -1.2, 0.05, 0.0, 2.5};
    for (double gv : grads) {
      auto g = m.zeros_like();
      g.weight[1][5] = gv;
      adam_step(m, g, lr);
      p = ref.step(p, gv, lr);
      CHECK(m.layers[1].weight[5] == doctest::Approx(p).epsilon(1e-15));
    }
  }
}

TEST_CASE("training") {
  const ArchitectureDescriptor a = toy(16);
  std::vector<ImageTensor> images = {oracle::random_image(16, 16, 1, 1), oracle::random_image(16, 16, 1, 2),
                                     oracle::random_image(16, 16, 1, 3)};
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(images, a, cfg), Error);
  cfg.epochs = 4;
  cfg.batch_size = 2;
  cfg.learning_rate = 1e-3;
  cfg.seed = 99;
  const auto r1 = train(images, a, cfg);
  const auto r2 = train(images, a, cfg);
  CHECK(r1.epoch_loss.size() == 4);
  CHECK(r1.model == r2.model);
  CHECK(r1.epoch_loss == r2.epoch_loss);
  cfg.seed = 100;
  CHECK_FALSE(train(images, a, cfg).model == r1.model);

  std::vector<ImageTensor> wrong = {ImageTensor(8, 8, 1)};
  CHECK_THROWS_AS(train(wrong, a, cfg), Error);
  CHECK_THROWS_AS(train(std::span<const ImageTensor>{}, a, cfg), Error);

  cfg.use_augmentation = false;
  cfg.epochs = 60;
  cfg.batch_size = 1;
  std::vector<ImageTensor> one = {images[0]};
  const auto r3 = train(one, a, cfg);
  CHECK(r3.epoch_loss.back() < r3.epoch_loss.front());

  int seen = 0;
  cfg.epochs = 2;
  cfg.lr_schedule = [&](int epoch, double base) {
    ++seen;
    return epoch == 0 ? base : 0.0;
  };
  train(one, a, cfg);
  CHECK(seen == 2);
}

TEST_CASE("checkpoint round trip and errors") {
  auto m = ModelWeights::initialize(toy(8), 5);
  adam_step(m, backward(m, std::vector{oracle::random_image(8, 8, 1, 1)},
                        std::vector{oracle::random_image(8, 8, 1, 1)}, {}).gradients, 1e-3);
  const auto path = scratch("m.tfr");
  save_checkpoint(m, path);
  const auto back = load_checkpoint(path);
  CHECK(back == m);
  const ImageTensor x = oracle::random_image(8, 8, 1, 2);
  CHECK(forward(back, x) == forward(m, x));

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [](const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  };
  std::string bad = bytes;
  bad[0] = 'X';
  write(scratch("magic.tfr"), bad);
  CHECK(load_code(scratch("magic.tfr")) == ErrorCode::kFormat);
  bad = bytes;
  bad[3] = '9';
  write(scratch("version.tfr"), bad);
  CHECK(load_code(scratch("version.tfr")) == ErrorCode::kVersionMismatch);
  write(scratch("short.tfr"), bytes.substr(0, bytes.size() / 2));
  CHECK(load_code(scratch("short.tfr")) == ErrorCode::kTruncated);
  write(scratch("long.tfr"), bytes + "x");
  CHECK(load_code(scratch("long.tfr")) == ErrorCode::kFormat);
  CHECK(load_code(scratch("nope.tfr")) == ErrorCode::kFileNotFound);
}
