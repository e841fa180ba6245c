/**
 * @file autoencoder.hpp
 * @brief Skip-connected convolutional autoencoder with hand-written
 *        backpropagation, Adam, training loop and checkpoint I/O.
 *
 * Graph for encoder ladder e[0..D-1]:
 *
 *   enc_l : conv(k x k, same) -> ReLU, input is the image (l = 0) or the
 *           2x2/stride-2 max-pool of enc_{l-1}
 *   dec_l : for l = D-2 .. 0, nearest x2 upsample of the level below, concat
 *           [upsampled, enc_l] along channels, conv -> ReLU with e[l] outputs
 *   out   : conv to input_channels -> sigmoid
 *
 * Parameters are stored in execution order: enc_0..enc_{D-1},
 * dec_{D-2}..dec_0, out.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "tfr/aligned.hpp"
#include "tfr/dataset.hpp"
#include "tfr/image.hpp"

namespace tfr {

struct ArchitectureDescriptor {
  int input_height = 256;
  int input_width = 256;
  int input_channels = 3;
  std::vector<int> encoder_channels = {64, 128, 256, 512, 512};
  int kernel_size = 3;

  int depth() const { return static_cast<int>(encoder_channels.size()); }
  /// Throws kInvalidArgument when depth < 2, sizes are not divisible by
  /// 2^(depth-1), or channels/kernel are invalid.
  void validate() const;

  friend bool operator==(const ArchitectureDescriptor&, const ArchitectureDescriptor&) = default;
};

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  RealVec weight;  // out x in x k x k, row-major
  RealVec bias;    // out

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

/// Same layout as the parameters, used for gradients and Adam moments.
struct ParamSet {
  std::vector<RealVec> weight;
  std::vector<RealVec> bias;

  void add(const ParamSet& other);
  void scale(double s);
  std::size_t count() const;
  friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

struct AdamState {
  ParamSet first_moment;
  ParamSet second_moment;
  std::int64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct ModelWeights {
  ArchitectureDescriptor arch;
  std::vector<ConvLayer> layers;
  AdamState adam;

  /// He-uniform kernels, zero biases, zeroed Adam state.
  static ModelWeights initialize(const ArchitectureDescriptor& arch, std::uint64_t seed);
  /// All weights and biases zero.
  static ModelWeights zeros(const ArchitectureDescriptor& arch);

  std::size_t parameter_count() const;
  ParamSet zeros_like() const;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

/// (in, out) channel pairs of every conv in parameter order.
std::vector<std::pair<int, int>> layer_shapes(const ArchitectureDescriptor& arch);

/// Spatial side lengths (height, width) at each encoder level.
std::vector<std::pair<int, int>> level_sizes(const ArchitectureDescriptor& arch);

struct LossWeights {
  double l1 = 1.0;
  double l2 = 100.0;
};

/// lambda_l1 * mean|x - r| + lambda_l2 * mean (x - r)^2 over all elements.
double recon_loss(const ImageTensor& x, const ImageTensor& r, double lambda_l1, double lambda_l2);

ImageTensor forward(const ModelWeights& model, const ImageTensor& image);
std::vector<ImageTensor> forward(const ModelWeights& model, std::span<const ImageTensor> batch);

struct BackwardResult {
  ParamSet gradients;
  double loss = 0.0;  // batch mean of recon_loss
};

/// Exact gradients of the batch-mean recon_loss(targets[i], forward(batch[i])).
/// Per-item gradients are computed independently (optionally on `threads`
/// workers) and reduced in index order, so the result does not depend on the
/// thread count.
BackwardResult backward(const ModelWeights& model, std::span<const ImageTensor> batch,
                        std::span<const ImageTensor> targets, const LossWeights& weights,
                        int threads = 1);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// In-place bias-corrected Adam update; increments the step counter.
void adam_step(ModelWeights& model, const ParamSet& gradients, double learning_rate,
               const AdamHyper& hyper = {});

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 500;
  int batch_size = 16;
  double lambda_l1 = 1.0;
  double lambda_l2 = 100.0;
  AugmentSpec augment;
  bool use_augmentation = true;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Optional learning-rate schedule (epoch, base_lr) -> lr. Empty = constant.
  std::function<double(int, double)> lr_schedule;

  void validate() const;
};

struct TrainResult {
  ModelWeights model;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Optional per-epoch callback (epoch index from 1, mean loss).
using EpochCallback = std::function<void(int, double)>;

TrainResult train(std::span<const ImageTensor> images, const ArchitectureDescriptor& arch,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Trains on `<dataset_root>/train/good`.
TrainResult train(const std::filesystem::path& dataset_root, const ArchitectureDescriptor& arch,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// CSV `epoch,mean_loss`.
void write_training_log(std::span<const double> epoch_loss, const std::filesystem::path& path);

void save_checkpoint(const ModelWeights& model, const std::filesystem::path& path);
/// Errors: kFileNotFound, kFormat (bad magic / malformed), kVersionMismatch,
/// kTruncated.
ModelWeights load_checkpoint(const std::filesystem::path& path);

}  // namespace tfr
