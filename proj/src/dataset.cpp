#include "tfr/dataset.hpp"

#include <algorithm>
#include <cctype>

#include "tfr/error.hpp"

namespace tfr {

namespace fs = std::filesystem;

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kNormal: return "normal";
    case Label::kDefect: return "defect";
    case Label::kUnknown: return "unknown";
  }
  return "unknown";
}

std::vector<NamedImage> Dataset::test_normals() const {
  std::vector<NamedImage> out;
  for (const auto& item : test) {
    if (item.label == Label::kNormal) out.push_back(item);
  }
  return out;
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void append_folder(const fs::path& root, const fs::path& dir, Label label, int channels,
                   std::vector<NamedImage>& out) {
  for (const auto& file : list_images(dir)) {
    NamedImage item;
    item.id = fs::relative(file, root).generic_string();
    item.label = label;
    item.image = with_channels(load_image(file), channels);
    out.push_back(std::move(item));
  }
}

}  // namespace

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NamedImage> load_train_images(const fs::path& root, int channels) {
  const fs::path train_dir = root / "train" / "good";
  std::error_code ec;
  if (!fs::is_directory(train_dir, ec)) {
    fail(ErrorCode::kFileNotFound, "missing training folder: " + train_dir.string());
  }
  std::vector<NamedImage> out;
  append_folder(root, train_dir, Label::kNormal, channels, out);
  return out;
}

Dataset load_dataset(const fs::path& root, int channels) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    fail(ErrorCode::kFileNotFound, "no such dataset folder: " + root.string());
  }
  Dataset ds;
  ds.category = fs::weakly_canonical(root).filename().string();
  ds.train = load_train_images(root, channels);

  const fs::path test_dir = root / "test";
  if (fs::is_directory(test_dir, ec)) {
    append_folder(root, test_dir / "good", Label::kNormal, channels, ds.test);
    for (const auto& sub : sorted_subdirs(test_dir)) {
      if (sub.filename() == "good") continue;
      append_folder(root, sub, Label::kDefect, channels, ds.test);
    }
  }
  return ds;
}

}  // namespace tfr
