#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sfd::imaging {

struct DatasetEntry {
  std::string stem;
  std::filesystem::path ir;
  std::filesystem::path vis;
  std::optional<std::filesystem::path> mask;
};

struct DatasetIndex {
  std::vector<DatasetEntry> entries;  // sorted by stem
  std::vector<std::string> warnings;  // one per unmatched file
};

/// Matches *.png files by stem. Throws DatasetError when no stem appears in
/// both ir_dir and vis_dir. A missing mask for a matched stem is not an
/// error; the entry just has no mask path.
DatasetIndex dataset_index(const std::filesystem::path& ir_dir, const std::filesystem::path& vis_dir,
                           const std::optional<std::filesystem::path>& mask_dir = std::nullopt);

/// Convenience for the `<root>/ir`, `<root>/vis`, `<root>/mask` layout.
DatasetIndex dataset_index(const std::filesystem::path& root);

}  // namespace sfd::imaging
