#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tfr/error.hpp"
#include "tfr/eval.hpp"
#include "tfr/synthgen.hpp"

namespace fs = std::filesystem;
using namespace tfr;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_of(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

struct Fixture {
  ModelWeights model;
  std::vector<NamedImage> test;
  NormalTemplate tmpl;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture fx;
    ArchitectureDescriptor a;
    a.input_height = a.input_width = 32;
    a.input_channels = 1;
    a.encoder_channels = {4, 8};
    fx.model = ModelWeights::initialize(a, 17);
    TextureSpec t;
    t.size = 32;
    DefectSpec d;
    d.margin = 6;
    d.contrast = 0.6;
    for (int i = 0; i < 5; ++i) {
      fx.test.push_back({"good/" + std::to_string(i), Label::kNormal, gen_texture(corpus_texture(t, 1, i))});
    }
    for (int i = 0; i < 5; ++i) {
      fx.test.push_back({"defect/" + std::to_string(i), Label::kDefect,
                         inject_defect(gen_texture(corpus_texture(t, 2, i)), corpus_defect(d, i)).image});
    }
    const ImageTensor src = gen_texture(corpus_texture(t, 0, 0));
    fx.tmpl = NormalTemplate("train/good/000.png", src, forward(fx.model, src));
    return fx;
  }();
  return f;
}

DetectionParams base() {
  DetectionParams p;
  p.border = 4;
  return p;
}

}  // namespace

TEST_CASE("auc examples") {
  CHECK(auc(std::vector{0, 1}, std::vector{0.1, 0.9}) == 1.0);
  CHECK(auc(std::vector{1, 0}, std::vector{0.1, 0.9}) == 0.0);
  CHECK(auc(std::vector{0, 1, 0, 1}, std::vector{2.0, 2.0, 2.0, 2.0}) == 0.5);
  CHECK(auc(std::vector{0, 0, 1, 1}, std::vector{0.3, 0.7, 0.5, 0.9}) == 0.75);
  CHECK_THROWS_AS(auc(std::vector{1, 1}, std::vector{0.1, 0.2}), Error);
  CHECK_THROWS_AS(auc(std::vector{0, 1}, std::vector{0.1}), Error);
  CHECK_THROWS_AS(auc(std::vector{0, 2}, std::vector{0.1, 0.2}), Error);
}

TEST_CASE("auc matches the pairwise oracle and its invariances") {
  tfr::Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(150);
    const bool ties = trial % 2 == 0;
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
      scores[i] = ties ? static_cast<double>(rng.below(4)) : rng.uniform();
    }
    const double fast = auc(labels, scores);
    CHECK(fast == oracle::pairwise_auc(labels, scores));
    std::vector<double> transformed(n), negated(n);
    for (std::size_t i = 0; i < n; ++i) {
      transformed[i] = std::exp(3.0 * scores[i]) + 7.0;
      negated[i] = -scores[i];
    }
    CHECK(auc(labels, transformed) == fast);
    if (!ties) CHECK(fast + auc(labels, negated) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("sweep table best cell tie-breaking") {
  SweepTable t;
  t.tau_values = {1, 2};
  t.th_values = {3, 4};
  t.auc = {{0.5, 0.9}, {0.9, 0.9}};
  t.update_best();
  CHECK(t.best.tau == 1);
  CHECK(t.best.th == 4);
  CHECK(t.best.auc == 0.9);
}

TEST_CASE("grid search") {
  const auto& fx = fixture();
  const std::vector<int> taus = {0, 2, 4};
  const std::vector<double> ths = {1, 4, 1000};
  const SweepTable t = grid_search(fx.test, fx.model, fx.tmpl, taus, ths, base(), "synthetic");
  CHECK(t.category == "synthetic");
  REQUIRE(t.auc.size() == 3);
  for (const auto& row : t.auc) {
    REQUIRE(row.size() == 3);
    CHECK(row[2] == 0.5);
    for (double v : row) CHECK((v >= 0.0 && v <= 1.0));
  }
  double best = 0.0;
  for (const auto& row : t.auc) best = std::max(best, *std::max_element(row.begin(), row.end()));
  CHECK(t.best.auc == best);

  SUBCASE("cells equal direct detection") {
    NormalTemplate tmpl = fx.tmpl;
    const auto labels = binary_labels(fx.test);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      for (std::size_t j = 0; j < ths.size(); ++j) {
        DetectionParams p = base();
        p.tau = taus[i];
        p.th = ths[j];
        std::vector<double> scores;
        for (const auto& item : fx.test) scores.push_back(static_cast<double>(detect(item, fx.model, tmpl, p).raw_count));
        CHECK(t.auc[i][j] == auc(labels, scores));
        const std::vector<int> one_tau = {taus[i]};
        const std::vector<double> one_th = {ths[j]};
        CHECK(grid_search(fx.test, fx.model, fx.tmpl, one_tau, one_th, base()).auc[0][0] == t.auc[i][j]);
      }
    }
  }
  SUBCASE("repeatable and thread-count independent") {
    const SweepTable again = grid_search(fx.test, fx.model, fx.tmpl, taus, ths, base(), "synthetic", 3);
    CHECK(again.auc == t.auc);
  }
  SUBCASE("single-class data rejected") {
    std::vector<NamedImage> normals(fx.test.begin(), fx.test.begin() + 5);
    CHECK_THROWS_AS(grid_search(normals, fx.model, fx.tmpl, taus, ths, base()), Error);
  }
}

TEST_CASE("ablation") {
  const auto& fx = fixture();
  const std::vector<int> taus = {1, 2, 3};
  const std::vector<double> ths = {2, 6, 12};
  const AblationResult r = ablate(fx.test, fx.model, fx.tmpl, taus, ths, base(), "synthetic");
  const SweepTable combined = grid_search(fx.test, fx.model, fx.tmpl, taus, ths, base(), "synthetic");
  CHECK(r.combined.auc == combined.auc);
  CHECK(r.auc(AblationMode::kCombined) == combined.best.auc);
  REQUIRE(r.recon_only.tau_values == std::vector<int>{0});
  const std::vector<int> zero = {0};
  CHECK(r.recon_only.auc == grid_search(fx.test, fx.model, fx.tmpl, zero, ths, base()).auc);

  std::vector<ImageTensor> gray;
  for (const auto& t : fx.test) gray.push_back(to_grayscale(t.image));
  const auto labels = binary_labels(fx.test);
  CHECK(r.fourier_only.auc == sweep_fields(gray, labels, fx.tmpl.source(), taus, ths, base()).auc);
  for (auto mode : {AblationMode::kFourierOnly, AblationMode::kReconOnly, AblationMode::kCombined}) {
    CHECK((r.auc(mode) >= 0.0 && r.auc(mode) <= 1.0));
  }
  CHECK(to_string(AblationMode::kFourierOnly) == "fourier_only");
}

TEST_CASE("reports") {
  SweepTable t;
  t.category = "carpet";
  t.tau_values = {2, 3};
  t.th_values = {4, 5};
  t.auc = {{0.5, 0.75}, {0.875, 0.875}};
  t.update_best();
  const std::string csv = sweep_csv(std::span(&t, 1));
  CHECK(csv == "category,tau,th,auc\ncarpet,2,4,0.500000\ncarpet,2,5,0.750000\ncarpet,3,4,0.875000\ncarpet,3,5,0.875000\n");
  const std::string md = sweep_markdown(std::span(&t, 1));
  CHECK(count_of(md, "**") == 2);
  CHECK(count_of(md, "**0.875**") == 1);

  AblationResult a;
  a.category = "carpet";
  a.fourier_only = t;
  a.recon_only = t;
  a.combined = t;
  a.fourier_only.best.auc = 0.5;
  a.recon_only.best.auc = 0.6;
  a.combined.best.auc = 0.9;
  CHECK(ablation_csv(std::span(&a, 1)) ==
        "category,mode,auc\ncarpet,fourier_only,0.500000\ncarpet,recon_only,0.600000\ncarpet,combined,0.900000\n");
  const std::string amd = ablation_markdown(std::span(&a, 1));
  CHECK(amd.find("Reconstruction") != std::string::npos);
  CHECK(amd.find("**0.900**") != std::string::npos);

  const fs::path dir = fs::temp_directory_path() / "tfr_test_eval";
  fs::create_directories(dir);
  emit_report(std::span(&t, 1), dir / "a");
  emit_report(std::span(&t, 1), dir / "b");
  CHECK(slurp(dir / "a.csv") == csv);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.md") == slurp(dir / "b.md"));
}
