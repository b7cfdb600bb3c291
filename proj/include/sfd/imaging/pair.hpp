#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfd/core/tensor.hpp"
#include "sfd/imaging/png_io.hpp"

namespace sfd::imaging {

/// A registered infrared / visible pair with the visible luma split out.
/// All planes are 1 x H x W, vis_rgb is 3 x H x W, values in [0,1].
struct ImagePair {
  std::string id;
  Tensor ir;
  Tensor vis_rgb;
  Tensor vis_y;
  Tensor vis_cb;
  Tensor vis_cr;

  std::int64_t height() const { return ir.dim(1); }
  std::int64_t width() const { return ir.dim(2); }
};

enum class MaskSource { File, Fallback };

/// Binary saliency mask, 1 x H x W with values in {0, 1}.
struct SaliencyMask {
  Tensor m;
  MaskSource source = MaskSource::File;
};

/// 8-bit image to C x H x W floats in [0,1].
Tensor to_tensor(const Image8& img);
/// C x H x W (C = 1 or 3) in [0,1] to 8-bit, rounding to nearest.
Image8 to_image8(const Tensor& t);

/// Builds a pair from decoded tensors. An RGB infrared image is reduced to
/// its luma; a grayscale visible image is replicated to RGB.
ImagePair make_pair(std::string id, const Tensor& ir, const Tensor& vis);

/// Throws RegistrationError on size mismatch and IoError on decode failure.
ImagePair load_pair(const std::filesystem::path& ir_path, const std::filesystem::path& vis_path);

/// Loads and thresholds at 0.5 when a path is given; otherwise runs Otsu on
/// the infrared image and marks pixels above the threshold.
SaliencyMask load_or_generate_mask(const ImagePair& pair, const std::optional<std::filesystem::path>& mask_path);

/// Otsu threshold t over 8-bit levels; the foreground is level > t.
int otsu_threshold(const std::vector<int>& levels);

/// Quantize [0,1] values to 0..255 by rounding.
std::vector<int> quantize8(std::span<const Real> values);

/// Same window from every plane of the pair and the mask.
ImagePair crop_pair(const ImagePair& pair, std::int64_t top, std::int64_t left, std::int64_t size);
SaliencyMask crop_mask(const SaliencyMask& mask, std::int64_t top, std::int64_t left, std::int64_t size);

}  // namespace sfd::imaging
