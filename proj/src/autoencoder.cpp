#include "tfr/autoencoder.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tfr/error.hpp"
#include "tfr/parallel.hpp"
#include "tfr/rng.hpp"

namespace tfr {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

// Planar activation: channel-major, then row-major within a channel.
struct Act {
  int c = 0, h = 0, w = 0;
  RealVec v;

  Act() = default;
  Act(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
};

Act from_image(const ImageTensor& img) {
  Act a(img.channels(), img.height(), img.width());
  const auto src = img.data();
  const std::size_t plane = a.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    for (int ch = 0; ch < a.c; ++ch) a.v[ch * plane + p] = src[p * a.c + ch];
  }
  return a;
}

ImageTensor to_image_tensor(const Act& a) {
  std::vector<double> data(a.v.size());
  const std::size_t plane = a.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    for (int ch = 0; ch < a.c; ++ch) data[p * a.c + ch] = a.v[ch * plane + p];
  }
  return ImageTensor(a.h, a.w, a.c, std::move(data));
}

// Rows of the column matrix are (channel, ky, kx); columns are output pixels.
void im2col(const Act& in, int k, RealVec& col) {
  const int pad = k / 2;
  const std::size_t plane = in.plane();
  col.assign(static_cast<std::size_t>(in.c) * k * k * plane, 0.0);
  std::size_t row = 0;
  for (int ch = 0; ch < in.c; ++ch) {
    const double* src = in.v.data() + ch * plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx, ++row) {
        double* dst = col.data() + row * plane;
        const int dy = ky - pad;
        const int dx = kx - pad;
        const int x_lo = std::max(0, -dx);
        const int x_hi = std::min(in.w, in.w - dx);
        for (int y = 0; y < in.h; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= in.h) continue;
          const double* s = src + static_cast<std::size_t>(sy) * in.w;
          double* d = dst + static_cast<std::size_t>(y) * in.w;
          for (int x = x_lo; x < x_hi; ++x) d[x] = s[x + dx];
        }
      }
    }
  }
}

void col2im(const RealVec& col, int k, Act& out) {
  const int pad = k / 2;
  const std::size_t plane = out.plane();
  std::fill(out.v.begin(), out.v.end(), 0.0);
  std::size_t row = 0;
  for (int ch = 0; ch < out.c; ++ch) {
    double* dst = out.v.data() + ch * plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx, ++row) {
        const double* src = col.data() + row * plane;
        const int dy = ky - pad;
        const int dx = kx - pad;
        const int x_lo = std::max(0, -dx);
        const int x_hi = std::min(out.w, out.w - dx);
        for (int y = 0; y < out.h; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= out.h) continue;
          double* d = dst + static_cast<std::size_t>(sy) * out.w;
          const double* s = src + static_cast<std::size_t>(y) * out.w;
          for (int x = x_lo; x < x_hi; ++x) d[x + dx] += s[x];
        }
      }
    }
  }
}

Act conv_forward(const ConvLayer& layer, const Act& in, RealVec& col) {
  im2col(in, layer.kernel, col);
  const auto k_rows = static_cast<Eigen::Index>(layer.in_channels) * layer.kernel * layer.kernel;
  const auto pixels = static_cast<Eigen::Index>(in.plane());
  Act out(layer.out_channels, in.h, in.w);
  ConstRowMap w(layer.weight.data(), layer.out_channels, k_rows);
  ConstRowMap c(col.data(), k_rows, pixels);
  RowMap o(out.v.data(), layer.out_channels, pixels);
  o.noalias() = w * c;
  for (int oc = 0; oc < layer.out_channels; ++oc) o.row(oc).array() += layer.bias[oc];
  return out;
}

// Accumulates dW, db for `layer` and optionally returns the input gradient.
void conv_backward(const ConvLayer& layer, const Act& in, const Act& d_out,
                   RealVec& col, RealVec& d_weight,
                   RealVec& d_bias, Act* d_in) {
  im2col(in, layer.kernel, col);
  const auto k_rows = static_cast<Eigen::Index>(layer.in_channels) * layer.kernel * layer.kernel;
  const auto pixels = static_cast<Eigen::Index>(in.plane());
  ConstRowMap w(layer.weight.data(), layer.out_channels, k_rows);
  ConstRowMap c(col.data(), k_rows, pixels);
  ConstRowMap g(d_out.v.data(), layer.out_channels, pixels);
  RowMap dw(d_weight.data(), layer.out_channels, k_rows);
  dw.noalias() += g * c.transpose();
  for (int oc = 0; oc < layer.out_channels; ++oc) d_bias[oc] += g.row(oc).sum();
  if (d_in != nullptr) {
    RealVec d_col(static_cast<std::size_t>(k_rows) * pixels);
    RowMap dc(d_col.data(), k_rows, pixels);
    dc.noalias() = w.transpose() * g;
    *d_in = Act(in.c, in.h, in.w);
    col2im(d_col, layer.kernel, *d_in);
  }
}

void relu_inplace(Act& a) {
  for (double& x : a.v) x = x > 0.0 ? x : 0.0;
}

// Zeroes the gradient wherever the ReLU output was not positive.
void relu_mask(const Act& out, Act& grad) {
  for (std::size_t i = 0; i < grad.v.size(); ++i) {
    if (!(out.v[i] > 0.0)) grad.v[i] = 0.0;
  }
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// 2x2 stride-2 max-pool. `argmax` holds, per output element, the flat index
// of the winning input element (first maximum in scan order).
Act max_pool(const Act& in, std::vector<std::size_t>& argmax) {
  Act out(in.c, in.h / 2, in.w / 2);
  argmax.assign(out.v.size(), 0);
  std::size_t o = 0;
  for (int ch = 0; ch < in.c; ++ch) {
    const std::size_t base = ch * in.plane();
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x, ++o) {
        std::size_t best = base + static_cast<std::size_t>(2 * y) * in.w + 2 * x;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t idx = base + static_cast<std::size_t>(2 * y + dy) * in.w + 2 * x + dx;
            if (in.v[idx] > in.v[best]) best = idx;
          }
        }
        out.v[o] = in.v[best];
        argmax[o] = best;
      }
    }
  }
  return out;
}

Act upsample2(const Act& in) {
  Act out(in.c, in.h * 2, in.w * 2);
  for (int ch = 0; ch < in.c; ++ch) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        out.v[ch * out.plane() + static_cast<std::size_t>(y) * out.w + x] =
            in.v[ch * in.plane() + static_cast<std::size_t>(y / 2) * in.w + x / 2];
      }
    }
  }
  return out;
}

// Adjoint of upsample2: each coarse cell receives the sum of its 4 children.
Act upsample2_adjoint(const Act& grad) {
  Act out(grad.c, grad.h / 2, grad.w / 2);
  for (int ch = 0; ch < grad.c; ++ch) {
    for (int y = 0; y < grad.h; ++y) {
      for (int x = 0; x < grad.w; ++x) {
        out.v[ch * out.plane() + static_cast<std::size_t>(y / 2) * out.w + x / 2] +=
            grad.v[ch * grad.plane() + static_cast<std::size_t>(y) * grad.w + x];
      }
    }
  }
  return out;
}

Act concat(const Act& a, const Act& b) {
  Act out(a.c + b.c, a.h, a.w);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(a.v.size()));
  return out;
}

struct Trace {
  std::vector<Act> enc_in;
  std::vector<Act> enc_out;
  std::vector<std::vector<std::size_t>> pool_argmax;
  std::vector<Act> dec_in;   // by level
  std::vector<Act> dec_out;  // by level
  Act final_in;
  Act output;
};

std::size_t decoder_layer(int depth, int level) {
  return static_cast<std::size_t>(depth + (depth - 2 - level));
}

void check_input(const ArchitectureDescriptor& arch, const ImageTensor& image) {
  if (image.height() != arch.input_height || image.width() != arch.input_width ||
      image.channels() != arch.input_channels) {
    fail(ErrorCode::kShapeMismatch,
         "image shape " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
             "x" + std::to_string(image.channels()) + " does not match architecture input " +
             std::to_string(arch.input_height) + "x" + std::to_string(arch.input_width) + "x" +
             std::to_string(arch.input_channels));
  }
}

Trace run_forward(const ModelWeights& model, const ImageTensor& image) {
  check_input(model.arch, image);
  const int depth = model.arch.depth();
  Trace t;
  t.enc_in.resize(depth);
  t.enc_out.resize(depth);
  t.pool_argmax.resize(depth - 1);
  t.dec_in.resize(depth - 1);
  t.dec_out.resize(depth - 1);
  RealVec col;

  for (int l = 0; l < depth; ++l) {
    t.enc_in[l] = l == 0 ? from_image(image) : max_pool(t.enc_out[l - 1], t.pool_argmax[l - 1]);
    t.enc_out[l] = conv_forward(model.layers[l], t.enc_in[l], col);
    relu_inplace(t.enc_out[l]);
  }
  const Act* current = &t.enc_out[depth - 1];
  for (int l = depth - 2; l >= 0; --l) {
    t.dec_in[l] = concat(upsample2(*current), t.enc_out[l]);
    t.dec_out[l] = conv_forward(model.layers[decoder_layer(depth, l)], t.dec_in[l], col);
    relu_inplace(t.dec_out[l]);
    current = &t.dec_out[l];
  }
  t.final_in = *current;
  t.output = conv_forward(model.layers.back(), t.final_in, col);
  // Saturated logistic values are pinned inside the open interval (0, 1).
  constexpr double kLo = std::numeric_limits<double>::denorm_min();
  const double kHi = std::nextafter(1.0, 0.0);
  for (double& x : t.output.v) x = std::clamp(sigmoid(x), kLo, kHi);
  return t;
}

// Gradient of recon_loss(target, output) for one image, accumulated into
// `grads` (which must be zero on entry for per-item use). Returns the loss.
double backprop_one(const ModelWeights& model, const ImageTensor& input, const ImageTensor& target,
                    const LossWeights& lw, ParamSet& grads) {
  require(target.same_shape(input), ErrorCode::kShapeMismatch,
          "target shape does not match input shape");
  const Trace t = run_forward(model, input);
  const int depth = model.arch.depth();
  const Act x = from_image(target);
  const Act& r = t.output;
  const double n = static_cast<double>(r.v.size());

  double l1 = 0.0, l2 = 0.0;
  Act d_pre(r.c, r.h, r.w);
  for (std::size_t i = 0; i < r.v.size(); ++i) {
    const double diff = r.v[i] - x.v[i];
    l1 += std::abs(diff);
    l2 += diff * diff;
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    const double d_r = (lw.l1 * sign + 2.0 * lw.l2 * diff) / n;
    d_pre.v[i] = d_r * r.v[i] * (1.0 - r.v[i]);
  }
  const double loss = lw.l1 * l1 / n + lw.l2 * l2 / n;

  RealVec col;
  const std::size_t last = model.layers.size() - 1;
  Act d_current;
  conv_backward(model.layers[last], t.final_in, d_pre, col, grads.weight[last], grads.bias[last],
                &d_current);

  std::vector<Act> d_enc(depth);
  for (int l = 0; l < depth; ++l) d_enc[l] = Act(t.enc_out[l].c, t.enc_out[l].h, t.enc_out[l].w);

  for (int l = 0; l <= depth - 2; ++l) {
    const std::size_t li = decoder_layer(depth, l);
    relu_mask(t.dec_out[l], d_current);
    Act d_in;
    conv_backward(model.layers[li], t.dec_in[l], d_current, col, grads.weight[li], grads.bias[li],
                  &d_in);
    // Split the concatenation: [upsampled | skip].
    const int up_channels = t.dec_in[l].c - t.enc_out[l].c;
    const std::size_t split = static_cast<std::size_t>(up_channels) * d_in.plane();
    for (std::size_t i = 0; i < d_enc[l].v.size(); ++i) d_enc[l].v[i] += d_in.v[split + i];
    Act d_up(up_channels, d_in.h, d_in.w);
    std::copy(d_in.v.begin(), d_in.v.begin() + static_cast<std::ptrdiff_t>(split), d_up.v.begin());
    d_current = upsample2_adjoint(d_up);
  }
  for (std::size_t i = 0; i < d_current.v.size(); ++i) d_enc[depth - 1].v[i] += d_current.v[i];

  for (int l = depth - 1; l >= 0; --l) {
    relu_mask(t.enc_out[l], d_enc[l]);
    if (l == 0) {
      conv_backward(model.layers[0], t.enc_in[0], d_enc[0], col, grads.weight[0], grads.bias[0],
                    nullptr);
      break;
    }
    Act d_in;
    conv_backward(model.layers[l], t.enc_in[l], d_enc[l], col, grads.weight[l], grads.bias[l],
                  &d_in);
    const auto& argmax = t.pool_argmax[l - 1];
    for (std::size_t i = 0; i < argmax.size(); ++i) d_enc[l - 1].v[argmax[i]] += d_in.v[i];
  }
  return loss;
}

}  // namespace

// ---------------------------------------------------------------------------

void ArchitectureDescriptor::validate() const {
  require(depth() >= 2, ErrorCode::kInvalidArgument, "architecture depth must be >= 2");
  require(input_height > 0 && input_width > 0, ErrorCode::kInvalidArgument,
          "architecture input size must be positive");
  require(input_channels == 1 || input_channels == 3, ErrorCode::kInvalidArgument,
          "architecture input_channels must be 1 or 3");
  require(kernel_size >= 1 && kernel_size % 2 == 1, ErrorCode::kInvalidArgument,
          "kernel_size must be a positive odd integer");
  for (int c : encoder_channels) {
    require(c >= 1, ErrorCode::kInvalidArgument, "encoder channel counts must be >= 1");
  }
  const int factor = 1 << (depth() - 1);
  require(input_height % factor == 0 && input_width % factor == 0, ErrorCode::kInvalidArgument,
          "input height and width must be divisible by 2^(depth-1) = " + std::to_string(factor));
}

std::vector<std::pair<int, int>> layer_shapes(const ArchitectureDescriptor& arch) {
  const auto& e = arch.encoder_channels;
  const int depth = arch.depth();
  std::vector<std::pair<int, int>> shapes;
  for (int l = 0; l < depth; ++l) shapes.emplace_back(l == 0 ? arch.input_channels : e[l - 1], e[l]);
  for (int l = depth - 2; l >= 0; --l) shapes.emplace_back(e[l + 1] + e[l], e[l]);
  shapes.emplace_back(e[0], arch.input_channels);
  return shapes;
}

std::vector<std::pair<int, int>> level_sizes(const ArchitectureDescriptor& arch) {
  std::vector<std::pair<int, int>> sizes;
  for (int l = 0; l < arch.depth(); ++l) {
    sizes.emplace_back(arch.input_height >> l, arch.input_width >> l);
  }
  return sizes;
}

void ParamSet::add(const ParamSet& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    for (std::size_t j = 0; j < weight[i].size(); ++j) weight[i][j] += other.weight[i][j];
    for (std::size_t j = 0; j < bias[i].size(); ++j) bias[i][j] += other.bias[i][j];
  }
}

void ParamSet::scale(double s) {
  for (auto& w : weight) for (double& x : w) x *= s;
  for (auto& b : bias) for (double& x : b) x *= s;
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& w : weight) n += w.size();
  for (const auto& b : bias) n += b.size();
  return n;
}

ModelWeights ModelWeights::zeros(const ArchitectureDescriptor& arch) {
  arch.validate();
  ModelWeights m;
  m.arch = arch;
  const int k = arch.kernel_size;
  for (auto [in, out] : layer_shapes(arch)) {
    ConvLayer layer;
    layer.in_channels = in;
    layer.out_channels = out;
    layer.kernel = k;
    layer.weight.assign(static_cast<std::size_t>(out) * in * k * k, 0.0);
    layer.bias.assign(static_cast<std::size_t>(out), 0.0);
    m.layers.push_back(std::move(layer));
  }
  m.adam.first_moment = m.zeros_like();
  m.adam.second_moment = m.zeros_like();
  return m;
}

ModelWeights ModelWeights::initialize(const ArchitectureDescriptor& arch, std::uint64_t seed) {
  ModelWeights m = zeros(arch);
  Rng rng(seed);
  for (auto& layer : m.layers) {
    const double fan_in = static_cast<double>(layer.in_channels) * layer.kernel * layer.kernel;
    const double limit = std::sqrt(6.0 / fan_in);
    for (double& w : layer.weight) w = rng.uniform(-limit, limit);
  }
  return m;
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

ParamSet ModelWeights::zeros_like() const {
  ParamSet p;
  for (const auto& layer : layers) {
    p.weight.emplace_back(layer.weight.size(), 0.0);
    p.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return p;
}

double recon_loss(const ImageTensor& x, const ImageTensor& r, double lambda_l1, double lambda_l2) {
  require(x.same_shape(r), ErrorCode::kShapeMismatch, "recon_loss: shape mismatch");
  require(!x.empty(), ErrorCode::kEmptyInput, "recon_loss: empty images");
  const auto a = x.data();
  const auto b = r.data();
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    l1 += std::abs(d);
    l2 += d * d;
  }
  const double n = static_cast<double>(a.size());
  return lambda_l1 * l1 / n + lambda_l2 * l2 / n;
}

ImageTensor forward(const ModelWeights& model, const ImageTensor& image) {
  return to_image_tensor(run_forward(model, image).output);
}

std::vector<ImageTensor> forward(const ModelWeights& model, std::span<const ImageTensor> batch) {
  std::vector<ImageTensor> out;
  out.reserve(batch.size());
  for (const auto& image : batch) out.push_back(forward(model, image));
  return out;
}

BackwardResult backward(const ModelWeights& model, std::span<const ImageTensor> batch,
                        std::span<const ImageTensor> targets, const LossWeights& weights,
                        int threads) {
  require(batch.size() == targets.size(), ErrorCode::kShapeMismatch,
          "backward: batch and targets differ in length");
  require(!batch.empty(), ErrorCode::kEmptyInput, "backward: empty batch");

  BackwardResult result;
  result.gradients = model.zeros_like();
  const std::size_t workers = static_cast<std::size_t>(std::max(threads, 1));
  std::vector<ParamSet> scratch(std::min(workers, batch.size()));
  std::vector<double> losses(batch.size(), 0.0);

  for (std::size_t start = 0; start < batch.size(); start += scratch.size()) {
    const std::size_t chunk = std::min(scratch.size(), batch.size() - start);
    parallel_for(chunk, threads, [&](std::size_t j) {
      scratch[j] = model.zeros_like();
      losses[start + j] = backprop_one(model, batch[start + j], targets[start + j], weights, scratch[j]);
    });
    for (std::size_t j = 0; j < chunk; ++j) result.gradients.add(scratch[j]);
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  result.gradients.scale(inv);
  double total = 0.0;
  for (double l : losses) total += l;
  result.loss = total * inv;
  return result;
}

void adam_step(ModelWeights& model, const ParamSet& gradients, double learning_rate,
               const AdamHyper& hyper) {
  require(gradients.weight.size() == model.layers.size(), ErrorCode::kShapeMismatch,
          "adam_step: gradient layout does not match model");
  auto& st = model.adam;
  st.step += 1;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(st.step));

  auto update = [&](RealVec& param, const RealVec& grad,
                    RealVec& m, RealVec& v) {
    require(param.size() == grad.size(), ErrorCode::kShapeMismatch,
            "adam_step: gradient shape does not match parameter");
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grad[i];
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      param[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weight, gradients.weight[l], st.first_moment.weight[l],
           st.second_moment.weight[l]);
    update(model.layers[l].bias, gradients.bias[l], st.first_moment.bias[l],
           st.second_moment.bias[l]);
  }
}

}  // namespace tfr
