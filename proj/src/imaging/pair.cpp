#include "sfd/imaging/pair.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>

#include "sfd/core/error.hpp"
#include "sfd/imaging/color.hpp"

namespace sfd::imaging {
namespace {

void assert_unit_range(const Tensor& t, const std::string& what) {
  for (Real v : t.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ContractError(fmt::format("{}: value {} outside [0,1]", what, v));
  }
}

Tensor luma_of(const Tensor& rgb) { return rgb_to_ycbcr(rgb).y; }

Tensor gray_to_rgb(const Tensor& g) {
  const auto n = g.dim(1) * g.dim(2);
  std::vector<Real> out(3 * n);
  for (int c = 0; c < 3; ++c) std::copy(g.data().begin(), g.data().end(), out.begin() + c * n);
  return Tensor({3, g.dim(1), g.dim(2)}, std::move(out));
}

Tensor crop_planes(const Tensor& t, std::int64_t top, std::int64_t left, std::int64_t size) {
  const auto c = t.dim(0), h = t.dim(1), w = t.dim(2);
  if (top < 0 || left < 0 || top + size > h || left + size > w || size <= 0) {
    throw ContractError(fmt::format("crop {}+{} x {}+{} outside {}", top, size, left, size, shape_str(t.shape())));
  }
  std::vector<Real> out(c * size * size);
  auto d = t.data();
  for (std::int64_t k = 0; k < c; ++k)
    for (std::int64_t y = 0; y < size; ++y)
      std::copy_n(d.begin() + (k * h + top + y) * w + left, size, out.begin() + (k * size + y) * size);
  return Tensor({c, size, size}, std::move(out));
}

}  // namespace

Tensor to_tensor(const Image8& img) {
  const std::int64_t c = img.channels, h = img.height, w = img.width;
  std::vector<Real> out(c * h * w);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      for (std::int64_t k = 0; k < c; ++k)
        out[(k * h + y) * w + x] = img.pixels[(y * w + x) * c + k] / 255.0f;
  return Tensor({c, h, w}, std::move(out));
}

Image8 to_image8(const Tensor& t) {
  if (t.rank() != 3 || (t.dim(0) != 1 && t.dim(0) != 3)) {
    throw DimensionError(fmt::format("to_image8: expected 1 or 3 channels, got {}", shape_str(t.shape())));
  }
  Image8 img;
  img.channels = static_cast<int>(t.dim(0));
  img.height = static_cast<int>(t.dim(1));
  img.width = static_cast<int>(t.dim(2));
  const std::int64_t c = img.channels, h = img.height, w = img.width;
  img.pixels.resize(c * h * w);
  auto d = t.data();
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      for (std::int64_t k = 0; k < c; ++k) {
        const Real v = std::clamp<Real>(d[(k * h + y) * w + x], 0, 1);
        img.pixels[(y * w + x) * c + k] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  return img;
}

ImagePair make_pair(std::string id, const Tensor& ir, const Tensor& vis) {
  if (ir.rank() != 3 || vis.rank() != 3) throw DimensionError("make_pair: expected C x H x W inputs");
  if (ir.dim(1) != vis.dim(1) || ir.dim(2) != vis.dim(2)) {
    throw RegistrationError(fmt::format("pair '{}': infrared is {}x{} but visible is {}x{}", id, ir.dim(2), ir.dim(1),
                                        vis.dim(2), vis.dim(1)));
  }
  ImagePair p;
  p.id = std::move(id);
  p.ir = ir.dim(0) == 3 ? luma_of(ir) : ir;
  p.vis_rgb = vis.dim(0) == 3 ? vis : gray_to_rgb(vis);
  auto ycc = rgb_to_ycbcr(p.vis_rgb);
  p.vis_y = ycc.y;
  p.vis_cb = ycc.cb;
  p.vis_cr = ycc.cr;
  assert_unit_range(p.ir, p.id + " ir");
  assert_unit_range(p.vis_rgb, p.id + " vis");
  assert_unit_range(p.vis_y, p.id + " vis_y");
  return p;
}

ImagePair load_pair(const std::filesystem::path& ir_path, const std::filesystem::path& vis_path) {
  auto ir = to_tensor(read_png(ir_path));
  auto vis = to_tensor(read_png(vis_path));
  return make_pair(ir_path.stem().string(), ir, vis);
}

std::vector<int> quantize8(std::span<const Real> values) {
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = static_cast<int>(std::lround(std::clamp<Real>(values[i], 0, 1) * 255.0f));
  return out;
}

int otsu_threshold(const std::vector<int>& levels) {
  std::array<double, 256> hist{};
  for (int v : levels) hist[static_cast<std::size_t>(v)] += 1.0;
  const double total = static_cast<double>(levels.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  int best_t = 0;
  double best = -1.0, w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

SaliencyMask load_or_generate_mask(const ImagePair& pair, const std::optional<std::filesystem::path>& mask_path) {
  const auto h = pair.height(), w = pair.width();
  std::vector<Real> m(h * w);
  SaliencyMask out;
  if (mask_path) {
    auto t = to_tensor(read_png(*mask_path));
    if (t.dim(1) != h || t.dim(2) != w) {
      throw RegistrationError(fmt::format("mask for '{}' is {}x{}, pair is {}x{}", pair.id, t.dim(2), t.dim(1), w, h));
    }
    if (t.dim(0) == 3) t = luma_of(t);
    auto d = t.data();
    for (std::int64_t i = 0; i < h * w; ++i) m[i] = d[i] >= 0.5f ? 1.0f : 0.0f;
    out.source = MaskSource::File;
  } else {
    auto q = quantize8(pair.ir.data());
    const int t = otsu_threshold(q);
    for (std::int64_t i = 0; i < h * w; ++i) m[i] = q[i] > t ? 1.0f : 0.0f;
    out.source = MaskSource::Fallback;
  }
  out.m = Tensor({1, h, w}, std::move(m));
  return out;
}

ImagePair crop_pair(const ImagePair& pair, std::int64_t top, std::int64_t left, std::int64_t size) {
  ImagePair p;
  p.id = pair.id;
  p.ir = crop_planes(pair.ir, top, left, size);
  p.vis_rgb = crop_planes(pair.vis_rgb, top, left, size);
  p.vis_y = crop_planes(pair.vis_y, top, left, size);
  p.vis_cb = crop_planes(pair.vis_cb, top, left, size);
  p.vis_cr = crop_planes(pair.vis_cr, top, left, size);
  return p;
}

SaliencyMask crop_mask(const SaliencyMask& mask, std::int64_t top, std::int64_t left, std::int64_t size) {
  return {crop_planes(mask.m, top, left, size), mask.source};
}

}  // namespace sfd::imaging
