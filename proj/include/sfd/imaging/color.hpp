#pragma once

#include "sfd/core/tensor.hpp"

namespace sfd::imaging {

// BT.601 full-range YCbCr on [0,1] values:
//   Y  = 0.299 R + 0.587 G + 0.114 B
//   Cb = 0.564 (B - Y) + 0.5
//   Cr = 0.713 (R - Y) + 0.5
inline constexpr double kYR = 0.299, kYG = 0.587, kYB = 0.114;
inline constexpr double kCbScale = 0.564, kCrScale = 0.713;

struct YCbCr {
  Tensor y;   // 1 x H x W
  Tensor cb;  // 1 x H x W
  Tensor cr;  // 1 x H x W
};

/// rgb: 3 x H x W in [0,1].
YCbCr rgb_to_ycbcr(const Tensor& rgb);

/// Exact inverse of rgb_to_ycbcr, no clamping.
Tensor ycbcr_to_rgb_unclamped(const Tensor& y, const Tensor& cb, const Tensor& cr);

/// Inverse transform for display: y is clamped to [0,1] first and every
/// output channel is clamped to [0,1].
Tensor recombine_color(const Tensor& fused_y, const Tensor& cb, const Tensor& cr);

}  // namespace sfd::imaging
