#include "tfr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "tfr/error.hpp"
#include "tfr/rng.hpp"

namespace tfr {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::kConfig, path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.count(key)) config_error(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string where = join(path, key);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) config_error(where, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) config_error(where, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          config_error(where, "expected a non-negative integer");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) config_error(where, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) config_error(where, "expected a string");
    }
    out = v.get<T>();
  } catch (const json::exception& e) {
    config_error(where, e.what());
  }
}

std::vector<int> read_int_list(const json& v, const std::string& where) {
  std::vector<int> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) config_error(where + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }
  if (v.is_object()) {
    check_keys(v, where, {"from", "to", "step"});
    int from = 0, to = 0, step = 1;
    if (!v.contains("from") || !v.contains("to")) config_error(where, "range needs 'from' and 'to'");
    read(v, where, "from", from);
    read(v, where, "to", to);
    read(v, where, "step", step);
    if (step <= 0) config_error(where + ".step", "must be > 0");
    for (int x = from; x <= to; x += step) out.push_back(x);
    return out;
  }
  config_error(where, "expected a list or a {from, to, step} range");
}

std::vector<double> read_real_list(const json& v, const std::string& where) {
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) config_error(where + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  if (v.is_object()) {
    check_keys(v, where, {"from", "to", "step"});
    double from = 0, to = 0, step = 1;
    if (!v.contains("from") || !v.contains("to")) config_error(where, "range needs 'from' and 'to'");
    read(v, where, "from", from);
    read(v, where, "to", to);
    read(v, where, "step", step);
    if (!(step > 0.0)) config_error(where + ".step", "must be > 0");
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(from + static_cast<double>(i) * step);
    return out;
  }
  config_error(where, "expected a list or a {from, to, step} range");
}

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) config_error(path, what);
}

}  // namespace

std::uint64_t RunConfig::train_seed() const { return derive_seed(seed, 11, 0); }
std::uint64_t RunConfig::texture_seed() const { return derive_seed(seed, 12, 0); }
std::uint64_t RunConfig::defect_seed() const { return derive_seed(seed, 13, 0); }

void validate_config(const RunConfig& c) {
  const auto& a = c.architecture;
  check(a.input_height > 0, "architecture.input_height", "must be > 0");
  check(a.input_width > 0, "architecture.input_width", "must be > 0");
  check(a.input_channels == 1 || a.input_channels == 3, "architecture.input_channels", "must be 1 or 3");
  check(a.kernel_size >= 1 && a.kernel_size % 2 == 1, "architecture.kernel_size", "must be a positive odd integer");
  check(a.depth() >= 2, "architecture.encoder_channels", "needs at least 2 levels");
  for (std::size_t i = 0; i < a.encoder_channels.size(); ++i) {
    check(a.encoder_channels[i] >= 1, "architecture.encoder_channels[" + std::to_string(i) + "]", "must be >= 1");
  }
  if (a.depth() >= 2 && a.depth() < 31) {
    const int f = 1 << (a.depth() - 1);
    check(a.input_height % f == 0, "architecture.input_height", "must be divisible by 2^(depth-1) = " + std::to_string(f));
    check(a.input_width % f == 0, "architecture.input_width", "must be divisible by 2^(depth-1) = " + std::to_string(f));
  }

  const auto& t = c.train;
  check(t.learning_rate > 0.0, "train.learning_rate", "must be > 0");
  check(t.epochs >= 1, "train.epochs", "must be >= 1");
  check(t.batch_size >= 1, "train.batch_size", "must be >= 1");
  check(t.lambda_l1 >= 0.0, "train.lambda_l1", "must be >= 0");
  check(t.lambda_l2 >= 0.0, "train.lambda_l2", "must be >= 0");
  check(t.augment.shear_range >= 0.0 && t.augment.shear_range < 1.0, "train.augment.shear_range", "must be in [0, 1)");
  check(t.augment.zoom_range >= 0.0 && t.augment.zoom_range < 1.0, "train.augment.zoom_range", "must be in [0, 1)");

  const auto& d = c.detection;
  const int side = a.input_height;
  check(d.tau >= 0 && d.tau <= side, "detection.tau", "must be in [0, " + std::to_string(side) + "]");
  check(d.th >= 0.0, "detection.th", "must be >= 0");
  check(d.border >= 0, "detection.border", "must be >= 0");
  check(2 * d.border < side, "detection.border", "2 * border must be smaller than the image side");
  check(d.scale > 0.0, "detection.scale", "must be > 0");

  check(c.templates.max_candidates >= 0, "templates.max_candidates", "must be >= 0");

  check(!c.sweep.tau.empty(), "sweep.tau", "must not be empty");
  check(!c.sweep.th.empty(), "sweep.th", "must not be empty");
  for (std::size_t i = 0; i < c.sweep.tau.size(); ++i) {
    check(c.sweep.tau[i] >= 0 && c.sweep.tau[i] <= side, "sweep.tau[" + std::to_string(i) + "]",
          "must be in [0, " + std::to_string(side) + "]");
  }
  for (std::size_t i = 0; i < c.sweep.th.size(); ++i) {
    check(c.sweep.th[i] >= 0.0, "sweep.th[" + std::to_string(i) + "]", "must be >= 0");
  }

  const auto& tex = c.corpus.texture;
  check(tex.size >= 4 && tex.size % 4 == 0, "corpus.texture.size", "must be a positive multiple of 4");
  check(tex.period >= 2, "corpus.texture.period", "must be >= 2");
  check(tex.noise_amplitude >= 0.0 && tex.noise_amplitude < 0.5, "corpus.texture.noise_amplitude", "must be in [0, 0.5)");
  const auto& def = c.corpus.defect;
  check(def.extent >= 1 && 2 * def.extent < tex.size, "corpus.defect.extent", "must be in [1, size/2)");
  check(def.contrast >= 0.0 && def.contrast <= 1.0, "corpus.defect.contrast", "must be in [0, 1]");
  check(def.count >= 1, "corpus.defect.count", "must be >= 1");
  check(def.margin >= 0 && tex.size - 2 * def.margin >= def.extent + 2, "corpus.defect.margin",
        "leaves no room for the defect extent");
  check(c.corpus.counts.n_train >= 1, "corpus.n_train", "must be >= 1");
  check(c.corpus.counts.n_test_normal >= 1, "corpus.n_test_normal", "must be >= 1");
  check(c.corpus.counts.n_test_defect >= 1, "corpus.n_test_defect", "must be >= 1");
}

RunConfig parse_config(const json& input) {
  const json& doc = (input.is_object() && input.contains("config")) ? input.at("config") : input;
  check_keys(doc, "", {"architecture", "train", "detection", "templates", "sweep", "corpus", "seed"});
  RunConfig c;
  read(doc, "", "seed", c.seed);

  if (doc.contains("architecture")) {
    const json& a = doc["architecture"];
    check_keys(a, "architecture", {"input_height", "input_width", "input_channels", "encoder_channels", "kernel_size"});
    read(a, "architecture", "input_height", c.architecture.input_height);
    read(a, "architecture", "input_width", c.architecture.input_width);
    read(a, "architecture", "input_channels", c.architecture.input_channels);
    read(a, "architecture", "kernel_size", c.architecture.kernel_size);
    if (a.contains("encoder_channels")) {
      c.architecture.encoder_channels = read_int_list(a["encoder_channels"], "architecture.encoder_channels");
    }
  }

  if (doc.contains("train")) {
    const json& t = doc["train"];
    check_keys(t, "train", {"learning_rate", "epochs", "batch_size", "lambda_l1", "lambda_l2", "augment", "use_augmentation"});
    read(t, "train", "learning_rate", c.train.learning_rate);
    read(t, "train", "epochs", c.train.epochs);
    read(t, "train", "batch_size", c.train.batch_size);
    read(t, "train", "lambda_l1", c.train.lambda_l1);
    read(t, "train", "lambda_l2", c.train.lambda_l2);
    read(t, "train", "use_augmentation", c.train.use_augmentation);
    if (t.contains("augment")) {
      const json& g = t["augment"];
      check_keys(g, "train.augment", {"shear_range", "zoom_range", "horizontal_flip", "vertical_flip"});
      read(g, "train.augment", "shear_range", c.train.augment.shear_range);
      read(g, "train.augment", "zoom_range", c.train.augment.zoom_range);
      read(g, "train.augment", "horizontal_flip", c.train.augment.horizontal_flip);
      read(g, "train.augment", "vertical_flip", c.train.augment.vertical_flip);
    }
  }

  if (doc.contains("detection")) {
    const json& d = doc["detection"];
    check_keys(d, "detection", {"tau", "th", "border", "scale"});
    read(d, "detection", "tau", c.detection.tau);
    read(d, "detection", "th", c.detection.th);
    read(d, "detection", "border", c.detection.border);
    read(d, "detection", "scale", c.detection.scale);
  }

  if (doc.contains("templates")) {
    const json& t = doc["templates"];
    check_keys(t, "templates", {"max_candidates"});
    read(t, "templates", "max_candidates", c.templates.max_candidates);
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    check_keys(s, "sweep", {"tau", "th"});
    if (s.contains("tau")) c.sweep.tau = read_int_list(s["tau"], "sweep.tau");
    if (s.contains("th")) c.sweep.th = read_real_list(s["th"], "sweep.th");
  }

  if (doc.contains("corpus")) {
    const json& k = doc["corpus"];
    check_keys(k, "corpus", {"texture", "defect", "n_train", "n_test_normal", "n_test_defect"});
    read(k, "corpus", "n_train", c.corpus.counts.n_train);
    read(k, "corpus", "n_test_normal", c.corpus.counts.n_test_normal);
    read(k, "corpus", "n_test_defect", c.corpus.counts.n_test_defect);
    if (k.contains("texture")) {
      const json& t = k["texture"];
      check_keys(t, "corpus.texture", {"size", "base", "period", "noise_amplitude"});
      read(t, "corpus.texture", "size", c.corpus.texture.size);
      read(t, "corpus.texture", "period", c.corpus.texture.period);
      read(t, "corpus.texture", "noise_amplitude", c.corpus.texture.noise_amplitude);
      if (t.contains("base")) {
        std::string base;
        read(t, "corpus.texture", "base", base);
        try {
          c.corpus.texture.base = parse_texture_base(base);
        } catch (const Error& e) {
          config_error("corpus.texture.base", e.what());
        }
      }
    }
    if (k.contains("defect")) {
      const json& d = k["defect"];
      check_keys(d, "corpus.defect", {"kind", "extent", "contrast", "count", "margin"});
      read(d, "corpus.defect", "extent", c.corpus.defect.extent);
      read(d, "corpus.defect", "contrast", c.corpus.defect.contrast);
      read(d, "corpus.defect", "count", c.corpus.defect.count);
      read(d, "corpus.defect", "margin", c.corpus.defect.margin);
      if (d.contains("kind")) {
        std::string kind;
        read(d, "corpus.defect", "kind", kind);
        try {
          c.corpus.defect.kind = parse_defect_kind(kind);
        } catch (const Error& e) {
          config_error("corpus.defect.kind", e.what());
        }
      }
    }
  }

  validate_config(c);
  c.train.seed = c.train_seed();
  c.corpus.texture.seed = c.texture_seed();
  c.corpus.defect.seed = c.defect_seed();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorCode::kFileNotFound, "no such config file: " + path.string());
  }
  std::ifstream in(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["architecture"] = {
      {"input_height", c.architecture.input_height},
      {"input_width", c.architecture.input_width},
      {"input_channels", c.architecture.input_channels},
      {"encoder_channels", c.architecture.encoder_channels},
      {"kernel_size", c.architecture.kernel_size},
  };
  j["train"] = {
      {"learning_rate", c.train.learning_rate},
      {"epochs", c.train.epochs},
      {"batch_size", c.train.batch_size},
      {"lambda_l1", c.train.lambda_l1},
      {"lambda_l2", c.train.lambda_l2},
      {"use_augmentation", c.train.use_augmentation},
      {"augment",
       {{"shear_range", c.train.augment.shear_range},
        {"zoom_range", c.train.augment.zoom_range},
        {"horizontal_flip", c.train.augment.horizontal_flip},
        {"vertical_flip", c.train.augment.vertical_flip}}},
  };
  j["detection"] = {
      {"tau", c.detection.tau},
      {"th", c.detection.th},
      {"border", c.detection.border},
      {"scale", c.detection.scale},
  };
  j["templates"] = {{"max_candidates", c.templates.max_candidates}};
  j["sweep"] = {{"tau", c.sweep.tau}, {"th", c.sweep.th}};
  j["corpus"] = {
      {"n_train", c.corpus.counts.n_train},
      {"n_test_normal", c.corpus.counts.n_test_normal},
      {"n_test_defect", c.corpus.counts.n_test_defect},
      {"texture",
       {{"size", c.corpus.texture.size},
        {"base", std::string(to_string(c.corpus.texture.base))},
        {"period", c.corpus.texture.period},
        {"noise_amplitude", c.corpus.texture.noise_amplitude}}},
      {"defect",
       {{"kind", std::string(to_string(c.corpus.defect.kind))},
        {"extent", c.corpus.defect.extent},
        {"contrast", c.corpus.defect.contrast},
        {"count", c.corpus.defect.count},
        {"margin", c.corpus.defect.margin}}},
  };
  return j;
}

}  // namespace tfr
