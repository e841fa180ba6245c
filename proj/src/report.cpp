#include <cstdio>
#include <fstream>
#include <sstream>

#include "tfr/error.hpp"
#include "tfr/eval.hpp"

namespace tfr {

namespace {

std::string fmt_auc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fmt_th(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

constexpr AblationMode kModes[] = {AblationMode::kFourierOnly, AblationMode::kReconOnly,
                                   AblationMode::kCombined};

}  // namespace

std::string sweep_csv(std::span<const SweepTable> tables) {
  std::ostringstream out;
  out << "category,tau,th,auc\n";
  for (const auto& t : tables) {
    for (std::size_t i = 0; i < t.tau_values.size(); ++i) {
      for (std::size_t j = 0; j < t.th_values.size(); ++j) {
        out << t.category << ',' << t.tau_values[i] << ',' << fmt_th(t.th_values[j]) << ','
            << fmt_auc(t.auc[i][j]) << '\n';
      }
    }
  }
  return out.str();
}

// Rows are tau, columns th; the best cell is bolded.
std::string sweep_markdown(std::span<const SweepTable> tables) {
  std::ostringstream out;
  for (const auto& t : tables) {
    out << "### " << (t.category.empty() ? "sweep" : t.category) << "\n\n";
    out << "| tau \\ th |";
    for (double th : t.th_values) out << ' ' << fmt_th(th) << " |";
    out << "\n|---|";
    for (std::size_t j = 0; j < t.th_values.size(); ++j) out << "---|";
    out << '\n';
    bool marked = false;
    for (std::size_t i = 0; i < t.tau_values.size(); ++i) {
      out << "| " << t.tau_values[i] << " |";
      for (std::size_t j = 0; j < t.th_values.size(); ++j) {
        const bool best = !marked && t.tau_values[i] == t.best.tau && t.th_values[j] == t.best.th;
        marked = marked || best;
        out << ' ' << (best ? "**" : "") << fmt_short(t.auc[i][j]) << (best ? "**" : "") << " |";
      }
      out << '\n';
    }
    out << "\nbest: tau=" << t.best.tau << ", th=" << fmt_th(t.best.th)
        << ", auc=" << fmt_auc(t.best.auc) << "\n\n";
  }
  return out.str();
}

std::string ablation_csv(std::span<const AblationResult> results) {
  std::ostringstream out;
  out << "category,mode,auc\n";
  for (const auto& r : results) {
    for (AblationMode m : kModes) {
      out << r.category << ',' << to_string(m) << ',' << fmt_auc(r.auc(m)) << '\n';
    }
  }
  return out.str();
}

// One row per mode with reconstruction / Fourier toggles, one column per
// category plus the average. The best mode per category is bolded.
std::string ablation_markdown(std::span<const AblationResult> results) {
  std::ostringstream out;
  out << "| Reconstruction | Fourier Transform |";
  for (const auto& r : results) out << ' ' << (r.category.empty() ? "-" : r.category) << " |";
  out << " Average |\n|---|---|";
  for (std::size_t i = 0; i <= results.size(); ++i) out << "---|";
  out << '\n';

  std::vector<AblationMode> best(results.size(), AblationMode::kCombined);
  for (std::size_t c = 0; c < results.size(); ++c) {
    for (AblationMode m : {AblationMode::kReconOnly, AblationMode::kFourierOnly}) {
      if (results[c].auc(m) > results[c].auc(best[c])) best[c] = m;
    }
  }
  for (AblationMode m : kModes) {
    const bool recon = m != AblationMode::kFourierOnly;
    const bool fourier = m != AblationMode::kReconOnly;
    out << "| " << (recon ? "yes" : "no") << " | " << (fourier ? "yes" : "no") << " |";
    double sum = 0.0;
    for (std::size_t c = 0; c < results.size(); ++c) {
      const double v = results[c].auc(m);
      sum += v;
      const bool b = best[c] == m;
      out << ' ' << (b ? "**" : "") << fmt_short(v) << (b ? "**" : "") << " |";
    }
    out << ' ' << fmt_short(results.empty() ? 0.0 : sum / static_cast<double>(results.size())) << " |\n";
  }
  return out.str();
}

void emit_report(std::span<const SweepTable> tables, const std::filesystem::path& stem) {
  write_text(with_suffix(stem, ".csv"), sweep_csv(tables));
  write_text(with_suffix(stem, ".md"), sweep_markdown(tables));
}

void emit_report(std::span<const AblationResult> results, const std::filesystem::path& stem) {
  write_text(with_suffix(stem, ".csv"), ablation_csv(results));
  write_text(with_suffix(stem, ".md"), ablation_markdown(results));
}

}  // namespace tfr
