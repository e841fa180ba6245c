#include "tfr/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "tfr/error.hpp"
#include "tfr/fourier.hpp"

namespace tfr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

std::string abs_path(const fs::path& p) { return fs::absolute(p).lexically_normal().generic_string(); }

void log(const RunContext& ctx, const std::string& line) {
  if (ctx.verbose) std::cerr << line << '\n';
}

std::vector<ImageTensor> images_of(const std::vector<NamedImage>& items) {
  std::vector<ImageTensor> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.image);
  return out;
}

std::string safe_name(std::string id) {
  for (char& c : id) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  const auto dot = id.rfind('.');
  return dot == std::string::npos ? id : id.substr(0, dot);
}

std::vector<NamedImage> load_inputs(const fs::path& input, int channels) {
  std::error_code ec;
  if (fs::is_regular_file(input, ec)) {
    return {NamedImage{input.filename().generic_string(), Label::kUnknown,
                       with_channels(load_image(input), channels)}};
  }
  if (!fs::is_directory(input, ec)) fail(ErrorCode::kFileNotFound, "no such input: " + input.string());
  if (fs::is_directory(input / "test", ec)) return load_dataset(input, channels).test;
  std::vector<NamedImage> out;
  for (const auto& p : list_images(input)) {
    out.push_back({p.filename().generic_string(), Label::kUnknown, with_channels(load_image(p), channels)});
  }
  require(!out.empty(), ErrorCode::kEmptyInput, "no images found in " + input.string());
  return out;
}

void require_both_classes(const std::vector<NamedImage>& test, const fs::path& dir) {
  bool normal = false, defect = false;
  for (const auto& t : test) {
    normal = normal || t.label == Label::kNormal;
    defect = defect || t.label == Label::kDefect;
  }
  require(normal && defect, ErrorCode::kInvalidArgument,
          dir.string() + ": test split needs both normal and defect images");
}

}  // namespace

json make_manifest(const RunContext& ctx, const std::string& command, const json& inputs) {
  json m;
  m["tool"] = "tfr";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["inputs"] = inputs;
  m["threads"] = ctx.threads;
  m["seeds"] = {{"master", ctx.config.seed},
                {"train", ctx.config.train_seed()},
                {"texture", ctx.config.texture_seed()},
                {"defect", ctx.config.defect_seed()}};
  m["config"] = to_json(ctx.config);
  return m;
}

void write_manifest(const json& manifest, const fs::path& out_dir) {
  ensure_dir(out_dir);
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "cannot write manifest in " + out_dir.string());
}

void cmd_gen(const RunContext& ctx, const fs::path& out_dir) {
  const auto& corpus = ctx.config.corpus;
  TextureSpec texture = corpus.texture;
  texture.seed = ctx.config.texture_seed();
  DefectSpec defect = corpus.defect;
  defect.seed = ctx.config.defect_seed();
  ensure_dir(out_dir);
  const CorpusSummary s = gen_corpus(out_dir, texture, defect, corpus.counts);
  write_manifest(make_manifest(ctx, "gen", json::object()), out_dir);
  log(ctx, "gen: wrote " + std::to_string(s.train.size() + s.test_normal.size() + s.test_defect.size()) +
               " images to " + out_dir.string());
}

void cmd_train(const RunContext& ctx, const fs::path& data_dir, const fs::path& out_dir) {
  TrainConfig cfg = ctx.config.train;
  cfg.seed = ctx.config.train_seed();
  cfg.threads = ctx.threads;
  ensure_dir(out_dir);
  TrainResult result = train(data_dir, ctx.config.architecture, cfg, [&](int epoch, double loss) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "epoch %d/%d loss %.6f", epoch, cfg.epochs, loss);
    log(ctx, buf);
  });
  save_checkpoint(result.model, out_dir / "model.tfr");
  write_training_log(result.epoch_loss, out_dir / "train_log.csv");
  write_manifest(make_manifest(ctx, "train", {{"data_dir", abs_path(data_dir)}}), out_dir);
}

void cmd_templates(const RunContext& ctx, const fs::path& checkpoint, const fs::path& data_dir,
                   const fs::path& out_dir) {
  const ModelWeights model = load_checkpoint(checkpoint);
  const Dataset ds = load_dataset(data_dir, model.arch.input_channels);
  std::vector<NamedImage> candidates = ds.train;
  require(!candidates.empty(), ErrorCode::kEmptyInput, "no training images in " + data_dir.string());
  const int cap = ctx.config.templates.max_candidates;
  if (cap > 0 && candidates.size() > static_cast<std::size_t>(cap)) candidates.resize(static_cast<std::size_t>(cap));

  std::vector<NamedImage> holdouts = ds.test_normals();
  if (holdouts.empty()) holdouts = ds.train;

  const auto templates = build_templates(model, candidates);
  const auto holdout_images = images_of(holdouts);
  const TemplateSelection sel =
      rank_templates(templates, holdout_images, model, ctx.config.detection, ctx.threads);
  const NormalTemplate& chosen = templates[sel.index];

  ensure_dir(out_dir);
  const fs::path source_path = data_dir / chosen.source_id();
  json doc = {{"source_id", chosen.source_id()},
              {"source_path", abs_path(source_path)},
              {"tau", ctx.config.detection.tau},
              {"th", ctx.config.detection.th},
              {"mean_raw_count", sel.mean_counts[sel.index]}};
  {
    std::ofstream out(out_dir / "template.json", std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write template.json");
  }
  save_image(chosen.reconstruction(), out_dir / "template.png");
  {
    std::ofstream out(out_dir / "template_ranking.csv", std::ios::binary);
    out << "source_id,mean_raw_count\n";
    char buf[64];
    for (std::size_t i = 0; i < templates.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.6f", sel.mean_counts[i]);
      out << templates[i].source_id() << ',' << buf << '\n';
    }
  }
  write_manifest(make_manifest(ctx, "templates",
                               {{"checkpoint", abs_path(checkpoint)}, {"data_dir", abs_path(data_dir)}}),
                 out_dir);
  log(ctx, "templates: selected " + chosen.source_id());
}

NormalTemplate load_template(const fs::path& template_file, const ModelWeights& model) {
  std::error_code ec;
  if (!fs::is_regular_file(template_file, ec)) {
    fail(ErrorCode::kFileNotFound, "no such template file: " + template_file.string());
  }
  json doc;
  try {
    std::ifstream in(template_file);
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, template_file.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("source_id") || !doc.contains("source_path")) {
    fail(ErrorCode::kFormat, template_file.string() + ": missing source_id/source_path");
  }
  const fs::path source = doc["source_path"].get<std::string>();
  const ImageTensor image = with_channels(load_image(source), model.arch.input_channels);
  return NormalTemplate(doc["source_id"].get<std::string>(), image, forward(model, image));
}

void cmd_detect(const RunContext& ctx, const fs::path& checkpoint, const fs::path& template_file,
                const fs::path& input, const fs::path& out_dir, const std::optional<fs::path>& debug_dir) {
  const ModelWeights model = load_checkpoint(checkpoint);
  NormalTemplate tmpl = load_template(template_file, model);
  const auto images = load_inputs(input, model.arch.input_channels);
  const DetectionParams& params = ctx.config.detection;

  std::vector<ScoreRecord> records;
  if (debug_dir) {
    ensure_dir(*debug_dir);
    tmpl.bind(params.tau);
    save_image(spectrum_image(shift(dft2(tmpl.reconstruction()))), *debug_dir / "template_spectrum.png");
    save_image(normalized_image(tmpl.filtered()), *debug_dir / "template_filtered.png");
    for (const auto& item : images) {
      DetectionTrace trace;
      records.push_back(detect(item, model, tmpl, params, &trace));
      const std::string stem = safe_name(item.id);
      save_image(trace.reconstruction, *debug_dir / (stem + "_recon.png"));
      save_image(spectrum_image(shift(dft2(trace.reconstruction))), *debug_dir / (stem + "_spectrum.png"));
      save_image(normalized_image(trace.filtered), *debug_dir / (stem + "_filtered.png"));
      ImageTensor binary(trace.binary.height, trace.binary.width, 1);
      for (std::size_t i = 0; i < trace.binary.data.size(); ++i) binary.data()[i] = trace.binary.data[i];
      save_image(binary, *debug_dir / (stem + "_binary.png"));
    }
    records = normalize_scores(std::move(records));
  } else {
    records = score_corpus(images, model, tmpl, params, ctx.threads);
  }

  ensure_dir(out_dir);
  write_scores_csv(records, out_dir / "scores.csv");
  write_manifest(make_manifest(ctx, "detect",
                               {{"checkpoint", abs_path(checkpoint)},
                                {"template", abs_path(template_file)},
                                {"input", abs_path(input)}}),
                 out_dir);
}

SweepTable cmd_sweep(const RunContext& ctx, const fs::path& checkpoint, const fs::path& template_file,
                     const fs::path& data_dir, const fs::path& out_dir) {
  const ModelWeights model = load_checkpoint(checkpoint);
  const NormalTemplate tmpl = load_template(template_file, model);
  const Dataset ds = load_dataset(data_dir, model.arch.input_channels);
  require_both_classes(ds.test, data_dir);
  const auto& range = ctx.config.sweep;
  SweepTable table = grid_search(ds.test, model, tmpl, range.tau, range.th, ctx.config.detection,
                                 ds.category, ctx.threads);
  ensure_dir(out_dir);
  emit_report(std::span<const SweepTable>(&table, 1), out_dir / "sweep");
  write_manifest(make_manifest(ctx, "sweep",
                               {{"checkpoint", abs_path(checkpoint)},
                                {"template", abs_path(template_file)},
                                {"data_dir", abs_path(data_dir)}}),
                 out_dir);
  return table;
}

AblationResult cmd_ablate(const RunContext& ctx, const fs::path& checkpoint, const fs::path& template_file,
                          const fs::path& data_dir, const fs::path& out_dir) {
  const ModelWeights model = load_checkpoint(checkpoint);
  const NormalTemplate tmpl = load_template(template_file, model);
  const Dataset ds = load_dataset(data_dir, model.arch.input_channels);
  require_both_classes(ds.test, data_dir);
  const auto& range = ctx.config.sweep;
  AblationResult result = ablate(ds.test, model, tmpl, range.tau, range.th, ctx.config.detection,
                                 ds.category, ctx.threads);
  ensure_dir(out_dir);
  emit_report(std::span<const AblationResult>(&result, 1), out_dir / "ablation");
  write_manifest(make_manifest(ctx, "ablate",
                               {{"checkpoint", abs_path(checkpoint)},
                                {"template", abs_path(template_file)},
                                {"data_dir", abs_path(data_dir)}}),
                 out_dir);
  return result;
}

ExperimentResult cmd_experiment(const RunContext& ctx, const fs::path& out_dir) {
  ensure_dir(out_dir);
  write_manifest(make_manifest(ctx, "experiment", json::object()), out_dir);
  const fs::path corpus = out_dir / "corpus";
  const fs::path model_dir = out_dir / "model";
  const fs::path template_dir = out_dir / "template";
  cmd_gen(ctx, corpus);
  cmd_train(ctx, corpus, model_dir);
  cmd_templates(ctx, model_dir / "model.tfr", corpus, template_dir);
  ExperimentResult r;
  r.sweep = cmd_sweep(ctx, model_dir / "model.tfr", template_dir / "template.json", corpus, out_dir / "sweep");
  r.ablation = cmd_ablate(ctx, model_dir / "model.tfr", template_dir / "template.json", corpus,
                          out_dir / "ablation");
  return r;
}

}  // namespace tfr
