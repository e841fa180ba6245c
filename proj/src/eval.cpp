#include "tfr/eval.hpp"

#include <algorithm>
#include <numeric>

#include "tfr/error.hpp"
#include "tfr/fourier.hpp"
#include "tfr/parallel.hpp"

namespace tfr {

double auc(std::span<const int> labels, std::span<const double> scores) {
  require(labels.size() == scores.size(), ErrorCode::kShapeMismatch,
          "auc: labels and scores differ in length");
  std::size_t positives = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, ErrorCode::kInvalidArgument, "auc: labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  const std::size_t negatives = labels.size() - positives;
  require(positives > 0 && negatives > 0, ErrorCode::kInvalidArgument,
          "auc: need at least one positive and one negative label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based mid-ranks of the positives, doubled to stay integral.
  std::size_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const std::size_t twice_mid_rank = (i + 1) + j;  // ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) twice_rank_sum += twice_mid_rank;
    }
    i = j;
  }
  // 2U = 2R - P(P+1) counts wins twice and ties once.
  const std::size_t twice_u = twice_rank_sum - positives * (positives + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives * negatives));
}

void SweepTable::update_best() {
  bool first = true;
  for (std::size_t i = 0; i < tau_values.size(); ++i) {
    for (std::size_t j = 0; j < th_values.size(); ++j) {
      const double a = auc[i][j];
      const bool better =
          first || a > best.auc ||
          (a == best.auc && (tau_values[i] < best.tau ||
                             (tau_values[i] == best.tau && th_values[j] < best.th)));
      if (better) {
        best = {tau_values[i], th_values[j], a};
        first = false;
      }
    }
  }
}

std::vector<int> binary_labels(std::span<const NamedImage> images) {
  std::vector<int> labels;
  labels.reserve(images.size());
  for (const auto& item : images) {
    require(item.label != Label::kUnknown, ErrorCode::kInvalidArgument,
            "image " + item.id + " has no normal/defect label");
    labels.push_back(item.label == Label::kDefect ? 1 : 0);
  }
  return labels;
}

SweepTable sweep_fields(std::span<const ImageTensor> gray_inputs, std::span<const int> labels,
                        const ImageTensor& gray_reference, std::span<const int> tau_values,
                        std::span<const double> th_values, const DetectionParams& base,
                        int threads) {
  require(!gray_inputs.empty(), ErrorCode::kEmptyInput, "sweep: no test images");
  require(gray_inputs.size() == labels.size(), ErrorCode::kShapeMismatch,
          "sweep: labels and images differ in length");
  require(!tau_values.empty() && !th_values.empty(), ErrorCode::kEmptyInput,
          "sweep: empty tau or th range");

  SweepTable table;
  table.tau_values.assign(tau_values.begin(), tau_values.end());
  table.th_values.assign(th_values.begin(), th_values.end());
  table.auc.assign(tau_values.size(), std::vector<double>(th_values.size(), 0.0));

  const int side = gray_reference.height();
  std::vector<std::vector<double>> counts(th_values.size(), std::vector<double>(gray_inputs.size()));
  for (std::size_t ti = 0; ti < tau_values.size(); ++ti) {
    DetectionParams params = base;
    params.tau = tau_values[ti];
    params.validate(side);
    const Field reference = highpass_filter(gray_reference, params.tau);
    parallel_for(gray_inputs.size(), threads, [&](std::size_t i) {
      const Field diff = difference_map(highpass_filter(gray_inputs[i], params.tau), reference, params);
      for (std::size_t hi = 0; hi < th_values.size(); ++hi) {
        counts[hi][i] = static_cast<double>(count_above(diff, th_values[hi]));
      }
    });
    for (std::size_t hi = 0; hi < th_values.size(); ++hi) {
      require(th_values[hi] >= 0.0, ErrorCode::kInvalidArgument, "sweep: th must be >= 0");
      table.auc[ti][hi] = auc(labels, counts[hi]);
    }
  }
  table.update_best();
  return table;
}

namespace {

std::vector<ImageTensor> reconstruct_all(std::span<const NamedImage> images, const ModelWeights& model,
                                         int threads) {
  std::vector<ImageTensor> out(images.size());
  parallel_for(images.size(), threads,
               [&](std::size_t i) { out[i] = reconstruct_gray(model, images[i].image); });
  return out;
}

}  // namespace

SweepTable grid_search(std::span<const NamedImage> test, const ModelWeights& model,
                       const NormalTemplate& tmpl, std::span<const int> tau_values,
                       std::span<const double> th_values, const DetectionParams& base,
                       const std::string& category, int threads) {
  const auto labels = binary_labels(test);
  const auto recon = reconstruct_all(test, model, threads);
  SweepTable table = sweep_fields(recon, labels, tmpl.reconstruction(), tau_values, th_values, base, threads);
  table.category = category;
  return table;
}

std::string_view to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFourierOnly: return "fourier_only";
    case AblationMode::kReconOnly: return "recon_only";
    case AblationMode::kCombined: return "combined";
  }
  return "unknown";
}

double AblationResult::auc(AblationMode mode) const {
  switch (mode) {
    case AblationMode::kFourierOnly: return fourier_only.best.auc;
    case AblationMode::kReconOnly: return recon_only.best.auc;
    case AblationMode::kCombined: return combined.best.auc;
  }
  return 0.0;
}

AblationResult ablate(std::span<const NamedImage> test, const ModelWeights& model,
                      const NormalTemplate& tmpl, std::span<const int> tau_values,
                      std::span<const double> th_values, const DetectionParams& base,
                      const std::string& category, int threads) {
  const auto labels = binary_labels(test);
  std::vector<ImageTensor> raw(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) raw[i] = to_grayscale(test[i].image);
  const auto recon = reconstruct_all(test, model, threads);

  AblationResult result;
  result.category = category;
  result.fourier_only = sweep_fields(raw, labels, tmpl.source(), tau_values, th_values, base, threads);
  const int no_mask[] = {0};
  result.recon_only = sweep_fields(recon, labels, tmpl.reconstruction(), no_mask, th_values, base, threads);
  result.combined = sweep_fields(recon, labels, tmpl.reconstruction(), tau_values, th_values, base, threads);
  for (SweepTable* t : {&result.fourier_only, &result.recon_only, &result.combined}) t->category = category;
  return result;
}

}  // namespace tfr
