#include "sfd/imaging/dataset.hpp"

#include <cctype>
#include <map>
#include <fmt/format.h>

#include "sfd/core/error.hpp"

namespace sfd::imaging {
namespace fs = std::filesystem;
namespace {

std::map<std::string, fs::path> png_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError(fmt::format("not a directory: {}", dir.string()));
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ext == ".png") out.emplace(e.path().stem().string(), e.path());
  }
  return out;
}

}  // namespace

DatasetIndex dataset_index(const fs::path& ir_dir, const fs::path& vis_dir, const std::optional<fs::path>& mask_dir) {
  const auto ir = png_stems(ir_dir);
  const auto vis = png_stems(vis_dir);
  std::map<std::string, fs::path> masks;
  if (mask_dir) masks = png_stems(*mask_dir);

  DatasetIndex idx;
  for (const auto& [stem, path] : ir) {
    auto it = vis.find(stem);
    if (it == vis.end()) {
      idx.warnings.push_back(fmt::format("{}: no visible image for infrared '{}'", stem, path.string()));
      continue;
    }
    DatasetEntry e{stem, path, it->second, std::nullopt};
    if (auto m = masks.find(stem); m != masks.end()) e.mask = m->second;
    idx.entries.push_back(std::move(e));
  }
  for (const auto& [stem, path] : vis) {
    if (!ir.count(stem)) idx.warnings.push_back(fmt::format("{}: no infrared image for visible '{}'", stem, path.string()));
  }
  if (idx.entries.empty()) {
    throw DatasetError(fmt::format("no matching stems between {} and {}", ir_dir.string(), vis_dir.string()));
  }
  return idx;
}

DatasetIndex dataset_index(const fs::path& root) {
  std::optional<fs::path> mask;
  if (fs::is_directory(root / "mask")) mask = root / "mask";
  return dataset_index(root / "ir", root / "vis", mask);
}

}  // namespace sfd::imaging
