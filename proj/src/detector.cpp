#include "tfr/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "tfr/error.hpp"
#include "tfr/fourier.hpp"
#include "tfr/parallel.hpp"

namespace tfr {

void DetectionParams::validate(int side) const {
  require(tau >= 0 && tau <= side, ErrorCode::kInvalidArgument,
          "tau must be in [0, " + std::to_string(side) + "]");
  require(th >= 0.0 && std::isfinite(th), ErrorCode::kInvalidArgument, "th must be >= 0");
  require(border >= 0, ErrorCode::kInvalidArgument, "border must be >= 0");
  require(2 * border < side, ErrorCode::kInvalidArgument,
          "2 * border must be smaller than the image side");
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::kInvalidArgument, "scale must be > 0");
}

NormalTemplate::NormalTemplate(std::string source_id, ImageTensor source, ImageTensor reconstruction)
    : source_id_(std::move(source_id)),
      source_(to_grayscale(source)),
      reconstruction_(to_grayscale(reconstruction)) {}

void NormalTemplate::bind(int tau) {
  if (tau_ && *tau_ == tau) return;
  filtered_ = highpass_filter(reconstruction_, tau);
  tau_ = tau;
}

const Field& NormalTemplate::filtered() const {
  require(tau_.has_value(), ErrorCode::kInvalidArgument, "template has no bound tau");
  return filtered_;
}

ImageTensor reconstruct_gray(const ModelWeights& model, const ImageTensor& image) {
  return to_grayscale(forward(model, image));
}

std::vector<NormalTemplate> build_templates(const ModelWeights& model,
                                            std::span<const NamedImage> normal_images) {
  require(!normal_images.empty(), ErrorCode::kEmptyInput, "build_templates: no normal images");
  std::vector<NormalTemplate> out;
  out.reserve(normal_images.size());
  for (const auto& item : normal_images) {
    out.emplace_back(item.id, item.image, forward(model, item.image));
  }
  return out;
}

Field difference_map(const Field& filtered_input, const Field& filtered_template,
                     const DetectionParams& params) {
  require(filtered_input.height == filtered_template.height &&
              filtered_input.width == filtered_template.width,
          ErrorCode::kShapeMismatch, "difference_map: field dimensions differ");
  const int b = params.border;
  require(b >= 0 && 2 * b < filtered_input.height && 2 * b < filtered_input.width,
          ErrorCode::kInvalidArgument, "difference_map: border too large for field");
  Field out(filtered_input.height - 2 * b, filtered_input.width - 2 * b);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(y, x) = std::abs(filtered_input.at(y + b, x + b) - filtered_template.at(y + b, x + b)) *
                     params.scale;
    }
  }
  return out;
}

BinaryMap binarize(const Field& diff, double th) {
  require(th >= 0.0, ErrorCode::kInvalidArgument, "binarize: th must be >= 0");
  BinaryMap m{diff.height, diff.width, std::vector<std::uint8_t>(diff.data.size(), 0)};
  for (std::size_t i = 0; i < diff.data.size(); ++i) m.data[i] = diff.data[i] > th ? 1 : 0;
  return m;
}

std::int64_t defect_score(const BinaryMap& map) {
  std::int64_t n = 0;
  for (auto v : map.data) n += v != 0 ? 1 : 0;
  return n;
}

std::int64_t count_above(const Field& diff, double th) {
  std::int64_t n = 0;
  for (double v : diff.data) n += v > th ? 1 : 0;
  return n;
}

std::vector<ScoreRecord> normalize_scores(std::vector<ScoreRecord> records) {
  require(!records.empty(), ErrorCode::kEmptyInput, "normalize_scores: no records");
  auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                      [](const auto& a, const auto& b) { return a.raw_count < b.raw_count; });
  const double min = static_cast<double>(lo->raw_count);
  const double range = static_cast<double>(hi->raw_count) - min;
  for (auto& r : records) {
    r.normalized = range > 0.0 ? (static_cast<double>(r.raw_count) - min) / range : 0.0;
  }
  return records;
}

TemplateSelection rank_templates(std::span<const NormalTemplate> templates,
                                 std::span<const ImageTensor> holdout_normals,
                                 const ModelWeights& model, const DetectionParams& params,
                                 int threads) {
  require(!templates.empty(), ErrorCode::kEmptyInput, "select_template: no candidate templates");
  require(!holdout_normals.empty(), ErrorCode::kEmptyInput, "select_template: no holdout normals");

  std::vector<Field> filtered_holdouts(holdout_normals.size());
  parallel_for(holdout_normals.size(), threads, [&](std::size_t i) {
    filtered_holdouts[i] = highpass_filter(reconstruct_gray(model, holdout_normals[i]), params.tau);
  });
  params.validate(filtered_holdouts.front().height);

  TemplateSelection sel;
  sel.mean_counts.resize(templates.size());
  parallel_for(templates.size(), threads, [&](std::size_t t) {
    const Field filtered = highpass_filter(templates[t].reconstruction(), params.tau);
    double total = 0.0;
    for (const auto& h : filtered_holdouts) {
      total += static_cast<double>(count_above(difference_map(h, filtered, params), params.th));
    }
    sel.mean_counts[t] = total / static_cast<double>(filtered_holdouts.size());
  });

  for (std::size_t t = 1; t < templates.size(); ++t) {
    const double best = sel.mean_counts[sel.index];
    if (sel.mean_counts[t] < best ||
        (sel.mean_counts[t] == best && templates[t].source_id() < templates[sel.index].source_id())) {
      sel.index = t;
    }
  }
  return sel;
}

NormalTemplate select_template(std::span<const NormalTemplate> templates,
                               std::span<const ImageTensor> holdout_normals,
                               const ModelWeights& model, const DetectionParams& params,
                               int threads) {
  const TemplateSelection sel = rank_templates(templates, holdout_normals, model, params, threads);
  NormalTemplate chosen = templates[sel.index];
  chosen.bind(params.tau);
  return chosen;
}

ScoreRecord detect(const NamedImage& image, const ModelWeights& model, NormalTemplate& tmpl,
                   const DetectionParams& params, DetectionTrace* trace) {
  ImageTensor recon = reconstruct_gray(model, image.image);
  params.validate(recon.height());
  tmpl.bind(params.tau);
  Field filtered = highpass_filter(recon, params.tau);
  Field diff = difference_map(filtered, tmpl.filtered(), params);

  ScoreRecord rec;
  rec.image_id = image.id;
  rec.label = image.label;
  if (trace != nullptr) {
    trace->binary = binarize(diff, params.th);
    rec.raw_count = defect_score(trace->binary);
    trace->reconstruction = std::move(recon);
    trace->filtered = std::move(filtered);
    trace->difference = std::move(diff);
  } else {
    rec.raw_count = count_above(diff, params.th);
  }
  return rec;
}

std::vector<ScoreRecord> score_corpus(std::span<const NamedImage> images, const ModelWeights& model,
                                      NormalTemplate& tmpl, const DetectionParams& params,
                                      int threads) {
  require(!images.empty(), ErrorCode::kEmptyInput, "score_corpus: no images");
  tmpl.bind(params.tau);
  std::vector<ScoreRecord> records(images.size());
  // Already bound, so concurrent detect() calls only read the template.
  parallel_for(images.size(), threads, [&](std::size_t i) {
    records[i] = detect(images[i], model, tmpl, params);
  });
  return normalize_scores(std::move(records));
}

void write_scores_csv(std::span<const ScoreRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "image_id,label,raw_count,normalized\n";
  char buf[64];
  for (const auto& r : records) {
    out << r.image_id << ',' << to_string(r.label) << ',' << r.raw_count << ',';
    if (r.normalized) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.normalized);
      out << buf;
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace tfr
