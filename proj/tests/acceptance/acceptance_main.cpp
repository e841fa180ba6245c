/**
 * @file acceptance_main.cpp
 * @brief Acceptance suite: one PASS/FAIL line per criterion.
 */
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "checks.hpp"
#include "oracles.hpp"
#include "tfr/commands.hpp"
#include "tfr/eval.hpp"
#include "tfr/fourier.hpp"
#include "tfr/synthgen.hpp"

namespace fs = std::filesystem;
using namespace tfr;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

template <class Fn>
void criterion(const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void fourier_correctness() {
  double dft_err = 0.0, trip_err = 0.0, parseval_err = 0.0;
  for (int n : {8, 16}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Field f = oracle::random_field(n, n, seed * 31 + static_cast<std::uint64_t>(n));
      const Spectrum s = dft2(f);
      const auto ref = oracle::naive_dft2(f);
      for (std::size_t i = 0; i < ref.size(); ++i) dft_err = std::max(dft_err, std::abs(s.data[i] - ref[i]));
      const ComplexField back = idft2(s);
      for (std::size_t i = 0; i < f.data.size(); ++i) {
        trip_err = std::max(trip_err, std::abs(back.data[i] - Complex(f.data[i])));
      }
      double lhs = 0.0, rhs = 0.0;
      for (double v : f.data) lhs += v * v;
      for (const auto& v : s.data) rhs += std::norm(v);
      rhs /= static_cast<double>(n) * n;
      parseval_err = std::max(parseval_err, std::abs(lhs - rhs) / lhs);
    }
  }
  report("fourier_correctness", dft_err < 1e-9 && trip_err < 1e-9 && parseval_err < 1e-6,
         fmt("max |dft - naive| %.3g, round trip %.3g, parseval rel %.3g", dft_err, trip_err, parseval_err));
}

void mask_geometry() {
  const HighPassMask m = make_mask(8, 2);
  bool exact = m.removed() == 4;
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      const bool inside = (u == 3 || u == 4) && (v == 3 || v == 4);
      exact = exact && m.at(u, v) == (inside ? 0 : 1);
    }
  bool extremes = true, monotone = true;
  for (int n : {5, 8, 16}) {
    extremes = extremes && make_mask(n, 0).removed() == 0 &&
               make_mask(n, n).removed() == static_cast<std::size_t>(n * n);
    for (int t = 0; t < n; ++t) {
      const HighPassMask a = make_mask(n, t), b = make_mask(n, t + 1);
      for (std::size_t i = 0; i < a.values.size(); ++i) monotone = monotone && (a.values[i] == 1 || b.values[i] == 0);
    }
  }
  report("mask_geometry", exact && extremes && monotone,
         std::string("bins {3,4}x{3,4} ") + (exact ? "exact" : "wrong") + ", extremes " + (extremes ? "ok" : "wrong") +
             ", monotone " + (monotone ? "ok" : "violated"));
}

void gradient_check() {
  ArchitectureDescriptor a;
  a.input_height = a.input_width = 8;
  a.input_channels = 1;
  a.encoder_channels = {8, 16};
  const auto model = ModelWeights::initialize(a, 2024);
  const std::vector<ImageTensor> batch = {oracle::random_image(8, 8, 1, 7)};
  const auto r = checks::gradient_check(model, batch, {1.0, 100.0}, 1e-4, 1e-4);
  report("gradient_check", r.failures == 0 && r.checked == model.parameter_count(),
         fmt("%.0f parameters, max relative error %.3g, max abs error %.3g, failures %.0f",
             static_cast<double>(r.checked), r.max_rel_error, r.max_abs_error, static_cast<double>(r.failures)));
}

void overfit() {
  ArchitectureDescriptor a;
  a.input_height = a.input_width = 32;
  a.input_channels = 1;
  a.encoder_channels = {16, 32};
  TextureSpec t;
  t.size = 32;
  t.seed = 3;
  const ImageTensor img = gen_texture(t);
  ModelWeights model = ModelWeights::initialize(a, 1);
  const std::vector<ImageTensor> batch = {img};
  const LossWeights lw;
  const double initial = recon_loss(img, forward(model, img), lw.l1, lw.l2);
  for (int step = 0; step < 200; ++step) {
    const auto g = backward(model, batch, batch, lw);
    adam_step(model, g.gradients, 3e-3);
  }
  const ImageTensor out = forward(model, img);
  const double final_loss = recon_loss(img, out, lw.l1, lw.l2);
  const double mae = checks::mean_abs_error(img, out);
  report("overfit_single_image", initial / final_loss >= 10.0 && mae < 0.05,
         fmt("loss %.4g -> %.4g (%.1fx), MAE %.4f", initial, final_loss, initial / final_loss, mae));
}

void auc_oracle() {
  Rng rng(99);
  int mismatches = 0;
  for (int c = 0; c < 50; ++c) {
    const std::size_t n = 2 + rng.below(199);
    const std::size_t levels = c % 3 == 0 ? 2 : (c % 3 == 1 ? 6 : 0);
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
      scores[i] = levels ? static_cast<double>(rng.below(levels)) : std::floor(rng.uniform() * 1000.0);
    }
    if (auc(labels, scores) != oracle::pairwise_auc(labels, scores)) ++mismatches;
  }
  report("auc_oracle_equivalence", mismatches == 0, fmt("%.0f of 50 corpora differ", mismatches));
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      std::ifstream in(e.path(), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      out[fs::relative(e.path(), root).generic_string()] = ss.str();
    }
  }
  return out;
}

void end_to_end(const fs::path& config, const fs::path& work) {
  RunContext ctx;
  ctx.config = load_config(config);
  ctx.threads = 1;
  const fs::path first = work / "e2e";
  fs::remove_all(first);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r;
  criterion("end_to_end_synthetic", [&] {
    r = cmd_experiment(ctx, first);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report("end_to_end_synthetic", r.sweep.best.auc >= 0.95 && secs <= 600.0,
           fmt("best AUC %.4f at tau=%.0f th=%g in %.0f s", r.sweep.best.auc, r.sweep.best.tau, r.sweep.best.th, secs));
  });
  if (r.sweep.tau_values.empty()) {
    report("ablation_ordering", false, "end-to-end run did not complete");
    report("determinism", false, "end-to-end run did not complete");
    return;
  }
  const double f = r.ablation.auc(AblationMode::kFourierOnly);
  const double ro = r.ablation.auc(AblationMode::kReconOnly);
  const double co = r.ablation.auc(AblationMode::kCombined);
  report("ablation_ordering", co >= ro && co >= f,
         fmt("fourier_only %.4f, recon_only %.4f, combined %.4f", f, ro, co));

  criterion("determinism", [&] {
    RunContext again;
    again.config = load_config(first / "manifest.json");
    again.threads = 1;
    const fs::path second = work / "e2e_rerun";
    fs::remove_all(second);
    cmd_experiment(again, second);
    const auto a = csv_files(first), b = csv_files(second);
    std::size_t same = 0;
    for (const auto& [name, body] : a) {
      const auto it = b.find(name);
      if (it != b.end() && it->second == body) ++same;
    }
    report("determinism", !a.empty() && same == a.size() && a.size() == b.size(),
           fmt("%.0f of %.0f CSV files byte-identical after rerun from manifest", static_cast<double>(same),
               static_cast<double>(a.size())));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string work = "acceptance_work";
  std::string config = TFR_E2E_CONFIG;
  bool skip_e2e = false;
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--config", config, "End-to-end experiment config");
  app.add_flag("--skip-e2e", skip_e2e, "Skip the end-to-end, ablation and determinism criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  criterion("fourier_correctness", fourier_correctness);
  criterion("mask_geometry", mask_geometry);
  criterion("gradient_check", gradient_check);
  criterion("overfit_single_image", overfit);
  criterion("auc_oracle_equivalence", auc_oracle);
  if (!skip_e2e) end_to_end(config, work);
  return g_failures == 0 ? 0 : 1;
}
