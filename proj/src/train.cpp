#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "tfr/autoencoder.hpp"
#include "tfr/error.hpp"
#include "tfr/rng.hpp"

namespace tfr {

void TrainConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorCode::kInvalidArgument,
          "learning_rate must be > 0");
  require(epochs >= 1, ErrorCode::kInvalidArgument, "epochs must be >= 1");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  require(lambda_l1 >= 0.0 && lambda_l2 >= 0.0, ErrorCode::kInvalidArgument,
          "loss weights must be >= 0");
  augment.validate();
}

TrainResult train(std::span<const ImageTensor> images, const ArchitectureDescriptor& arch,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  arch.validate();
  require(!images.empty(), ErrorCode::kEmptyInput, "training set is empty");
  for (const auto& img : images) {
    require(img.height() == arch.input_height && img.width() == arch.input_width &&
                img.channels() == arch.input_channels,
            ErrorCode::kShapeMismatch, "training image does not match architecture input shape");
  }

  TrainResult result;
  result.model = ModelWeights::initialize(arch, derive_seed(config.seed, 1, 0));
  Rng rng(derive_seed(config.seed, 2, 0));
  const LossWeights lw{config.lambda_l1, config.lambda_l2};

  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the owned stream.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    const double lr = config.lr_schedule ? config.lr_schedule(epoch, config.learning_rate)
                                         : config.learning_rate;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<ImageTensor> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const ImageTensor& src = images[order[i]];
        batch.push_back(config.use_augmentation ? augment(src, config.augment, rng) : src);
      }
      BackwardResult step = backward(result.model, batch, batch, lw, config.threads);
      loss_sum += step.loss * static_cast<double>(batch.size());
      adam_step(result.model, step.gradients, lr);
    }
    const double mean = loss_sum / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

TrainResult train(const std::filesystem::path& dataset_root, const ArchitectureDescriptor& arch,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  const auto named = load_train_images(dataset_root, arch.input_channels);
  std::vector<ImageTensor> images;
  images.reserve(named.size());
  for (const auto& item : named) images.push_back(item.image);
  return train(images, arch, config, on_epoch);
}

void write_training_log(std::span<const double> epoch_loss, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, epoch_loss[i]);
    out << buf;
  }
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace tfr
