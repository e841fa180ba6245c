#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tfr/image.hpp"

namespace tfr {

enum class Label { kNormal, kDefect, kUnknown };

std::string_view to_string(Label label);

struct NamedImage {
  std::string id;  // path relative to the dataset root, '/'-separated
  Label label = Label::kUnknown;
  ImageTensor image;
};

/**
 * One texture category laid out as
 *
 *     <root>/train/good/...       normal training images
 *     <root>/test/good/...        normal test images
 *     <root>/test/<other>/...     defect test images (any subfolder but good)
 *
 * which is also the MVTec AD layout. ground_truth/ is ignored.
 */
struct Dataset {
  std::string category;
  std::vector<NamedImage> train;
  std::vector<NamedImage> test;

  std::vector<NamedImage> test_normals() const;
};

/// Image files (png/pgm/ppm/pnm) directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Loads every image converted to `channels` (1 or 3). Throws kFileNotFound if
/// the root or train/good is missing.
Dataset load_dataset(const std::filesystem::path& root, int channels);

/// Loads only `<root>/train/good`.
std::vector<NamedImage> load_train_images(const std::filesystem::path& root, int channels);

}  // namespace tfr
