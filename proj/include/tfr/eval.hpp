#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tfr/autoencoder.hpp"
#include "tfr/dataset.hpp"
#include "tfr/detector.hpp"

namespace tfr {

/// Area under the ROC curve: P(pos > neg) + 0.5 P(pos == neg), computed from
/// mid-ranks (Mann-Whitney U). labels are 0 (normal) / 1 (defect).
/// Throws kInvalidArgument if either class is absent.
double auc(std::span<const int> labels, std::span<const double> scores);

struct BestCell {
  int tau = 0;
  double th = 0.0;
  double auc = 0.0;
};

struct SweepTable {
  std::string category;
  std::vector<int> tau_values;
  std::vector<double> th_values;
  std::vector<std::vector<double>> auc;  // [tau index][th index]
  BestCell best;

  /// Sets `best` to the max cell; ties go to smaller tau, then smaller th.
  void update_best();
};

/// Sweeps (tau, th) over precomputed grayscale inputs against one grayscale
/// reference. Each input is filtered and differenced once per tau; all th
/// values reuse that difference map. Parallel over images.
SweepTable sweep_fields(std::span<const ImageTensor> gray_inputs, std::span<const int> labels,
                        const ImageTensor& gray_reference, std::span<const int> tau_values,
                        std::span<const double> th_values, const DetectionParams& base,
                        int threads = 1);

/// Full-pipeline sweep over `test` (labels from each item) against the
/// template reconstruction. `base` supplies border and scale.
SweepTable grid_search(std::span<const NamedImage> test, const ModelWeights& model,
                       const NormalTemplate& tmpl, std::span<const int> tau_values,
                       std::span<const double> th_values, const DetectionParams& base,
                       const std::string& category = "", int threads = 1);

enum class AblationMode { kFourierOnly, kReconOnly, kCombined };

std::string_view to_string(AblationMode mode);

struct AblationResult {
  std::string category;
  SweepTable fourier_only;  // raw inputs vs raw template source
  SweepTable recon_only;    // tau = 0, reconstructions vs template
  SweepTable combined;      // full pipeline

  double auc(AblationMode mode) const;
};

AblationResult ablate(std::span<const NamedImage> test, const ModelWeights& model,
                      const NormalTemplate& tmpl, std::span<const int> tau_values,
                      std::span<const double> th_values, const DetectionParams& base,
                      const std::string& category = "", int threads = 1);

/// Writes `<stem>.csv` (category,tau,th,auc) and `<stem>.md`.
void emit_report(std::span<const SweepTable> tables, const std::filesystem::path& stem);
/// Writes `<stem>.csv` (category,mode,auc) and `<stem>.md`.
void emit_report(std::span<const AblationResult> results, const std::filesystem::path& stem);

std::string sweep_csv(std::span<const SweepTable> tables);
std::string sweep_markdown(std::span<const SweepTable> tables);
std::string ablation_csv(std::span<const AblationResult> results);
std::string ablation_markdown(std::span<const AblationResult> results);

/// Labels as 0/1; throws kInvalidArgument for kUnknown.
std::vector<int> binary_labels(std::span<const NamedImage> images);

}  // namespace tfr
