#pragma once

#include <cstdint>
#include <filesystem>

#include "sfd/core/rng.hpp"
#include "sfd/core/tensor.hpp"

namespace sfd::imaging {

/// A procedurally generated scene: warm targets that are bright in the
/// infrared plane and dim in the visible image, over a textured background
/// that only the visible image resolves.
struct SyntheticScene {
  Tensor ir;       // 1 x H x W
  Tensor vis_rgb;  // 3 x H x W
  Tensor mask;     // 1 x H x W, target pixels are 1
};

SyntheticScene generate_scene(Rng& rng, std::int64_t height, std::int64_t width);

/// Writes `<root>/{ir,vis,mask}/NNNN.png` for n scenes.
void write_synthetic_dataset(const std::filesystem::path& root, int n, std::int64_t height, std::int64_t width,
                             std::uint64_t seed);

}  // namespace sfd::imaging
