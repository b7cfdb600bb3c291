#include "sfd/imaging/color.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "sfd/core/error.hpp"

namespace sfd::imaging {
namespace {

std::int64_t plane_pixels(const Tensor& t, const char* what) {
  if (t.rank() != 3 || t.dim(0) != 1) {
    throw DimensionError(fmt::format("{}: expected a 1 x H x W plane, got {}", what, shape_str(t.shape())));
  }
  return t.dim(1) * t.dim(2);
}

}  // namespace

YCbCr rgb_to_ycbcr(const Tensor& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) {
    throw DimensionError(fmt::format("rgb_to_ycbcr: expected 3 x H x W, got {}", shape_str(rgb.shape())));
  }
  const auto h = rgb.dim(1), w = rgb.dim(2), n = h * w;
  auto d = rgb.data();
  std::vector<Real> y(n), cb(n), cr(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const double r = d[i], g = d[n + i], b = d[2 * n + i];
    const double yy = kYR * r + kYG * g + kYB * b;
    y[i] = static_cast<Real>(yy);
    cb[i] = static_cast<Real>(kCbScale * (b - yy) + 0.5);
    cr[i] = static_cast<Real>(kCrScale * (r - yy) + 0.5);
  }
  return {Tensor({1, h, w}, std::move(y)), Tensor({1, h, w}, std::move(cb)), Tensor({1, h, w}, std::move(cr))};
}

Tensor ycbcr_to_rgb_unclamped(const Tensor& y, const Tensor& cb, const Tensor& cr) {
  const auto n = plane_pixels(y, "ycbcr_to_rgb");
  if (cb.shape() != y.shape() || cr.shape() != y.shape()) throw DimensionError("ycbcr_to_rgb: plane shapes differ");
  auto yd = y.data(), bd = cb.data(), rd = cr.data();
  std::vector<Real> out(3 * n);
  for (std::int64_t i = 0; i < n; ++i) {
    const double yy = yd[i];
    const double r = yy + (rd[i] - 0.5) / kCrScale;
    const double b = yy + (bd[i] - 0.5) / kCbScale;
    const double g = (yy - kYR * r - kYB * b) / kYG;
    out[i] = static_cast<Real>(r);
    out[n + i] = static_cast<Real>(g);
    out[2 * n + i] = static_cast<Real>(b);
  }
  return Tensor({3, y.dim(1), y.dim(2)}, std::move(out));
}

Tensor recombine_color(const Tensor& fused_y, const Tensor& cb, const Tensor& cr) {
  plane_pixels(fused_y, "recombine_color");
  std::vector<Real> yc(fused_y.data().begin(), fused_y.data().end());
  for (auto& v : yc) v = std::clamp<Real>(v, 0, 1);
  Tensor rgb = ycbcr_to_rgb_unclamped(Tensor(fused_y.shape(), std::move(yc)), cb, cr);
  std::vector<Real> out(rgb.data().begin(), rgb.data().end());
  for (auto& v : out) v = std::clamp<Real>(v, 0, 1);
  return Tensor(rgb.shape(), std::move(out));
}

}  // namespace sfd::imaging
