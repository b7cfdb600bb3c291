#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace sfd::imaging {

/// Interleaved 8-bit image, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

/// Decodes any PNG to 8-bit gray or RGB. Palette images expand to RGB,
/// 16-bit samples are right-shifted to 8 bits and alpha is dropped.
Image8 read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image8& image);

}  // namespace sfd::imaging
