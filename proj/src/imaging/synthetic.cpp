#include "sfd/imaging/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <fmt/format.h>

#include "sfd/imaging/pair.hpp"
#include "sfd/imaging/png_io.hpp"

namespace sfd::imaging {
namespace {

struct Target {
  double cy, cx, ry, rx, heat;
};

// Smooth 0..1 value noise from a coarse random lattice, bilinear upsampled.
std::vector<double> value_noise(Rng& rng, std::int64_t h, std::int64_t w, int cells) {
  const int gh = cells + 2, gw = cells + 2;
  std::vector<double> grid(gh * gw);
  for (auto& g : grid) g = rng.uniform();
  std::vector<double> out(h * w);
  for (std::int64_t y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) / h * cells;
    const int iy = static_cast<int>(fy);
    const double ty = fy - iy;
    for (std::int64_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / w * cells;
      const int ix = static_cast<int>(fx);
      const double tx = fx - ix;
      const double a = grid[iy * gw + ix], b = grid[iy * gw + ix + 1];
      const double c = grid[(iy + 1) * gw + ix], d = grid[(iy + 1) * gw + ix + 1];
      out[y * w + x] = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return out;
}

}  // namespace

SyntheticScene generate_scene(Rng& rng, std::int64_t h, std::int64_t w) {
  const std::int64_t n = h * w;
  const double pi = std::numbers::pi;

  std::vector<Target> targets;
  const int n_targets = 2 + static_cast<int>(rng.below(3));
  for (int i = 0; i < n_targets; ++i) {
    Target t;
    t.ry = rng.uniform(0.08, 0.16) * h;
    t.rx = t.ry * rng.uniform(0.35, 0.7);  // upright, person-like
    t.cy = rng.uniform(t.ry + 2, h - t.ry - 2);
    t.cx = rng.uniform(t.rx + 2, w - t.rx - 2);
    t.heat = rng.uniform(0.8, 0.95);
    targets.push_back(t);
  }

  // Background structure: a few "buildings" (rectangles) with window texture.
  struct Block {
    std::int64_t y0, y1, x0, x1;
    double shade;
  };
  std::vector<Block> blocks;
  for (int i = 0; i < 3; ++i) {
    const auto bw = static_cast<std::int64_t>(rng.uniform(0.2, 0.4) * w);
    const auto bh = static_cast<std::int64_t>(rng.uniform(0.3, 0.6) * h);
    const auto x0 = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(w - bw)));
    blocks.push_back({h - bh, h, x0, x0 + bw, rng.uniform(0.35, 0.7)});
  }

  const auto haze = value_noise(rng, h, w, 4);
  const auto ir_drift = value_noise(rng, h, w, 3);
  const double freq = rng.uniform(0.25, 0.45);
  const double sky_r = rng.uniform(0.55, 0.75), sky_g = rng.uniform(0.6, 0.8), sky_b = rng.uniform(0.75, 0.95);

  std::vector<Real> ir(n), vis(3 * n), mask(n, 0.0f);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const std::int64_t i = y * w + x;
      // Visible: sky gradient, textured blocks, ground stripes.
      double lum = 0.55 + 0.25 * (1.0 - static_cast<double>(y) / h) + 0.15 * (haze[i] - 0.5);
      double r = sky_r * lum, g = sky_g * lum, b = sky_b * lum;
      double ir_v = 0.18 + 0.12 * ir_drift[i];
      for (const auto& bl : blocks) {
        if (y >= bl.y0 && x >= bl.x0 && x < bl.x1) {
          const bool window = ((y - bl.y0) % 8 < 4) && ((x - bl.x0) % 7 < 3);
          const double s = bl.shade + (window ? 0.25 : 0.0) + 0.05 * std::sin(freq * pi * x);
          r = s * 0.95;
          g = s * 0.9;
          b = s * 0.85;
          ir_v = 0.25 + 0.08 * ir_drift[i];
        }
      }
      const double grain = 0.04 * (rng.uniform() - 0.5);
      r += grain;
      g += grain;
      b += grain;
      ir_v += 0.02 * (rng.uniform() - 0.5);

      for (const auto& t : targets) {
        const double dy = (y - t.cy) / t.ry, dx = (x - t.cx) / t.rx;
        const double d2 = dy * dy + dx * dx;
        if (d2 <= 1.0) {
          mask[i] = 1.0f;
          ir_v = t.heat - 0.15 * d2;
          const double dark = 0.18 + 0.08 * d2;
          r = dark;
          g = dark * 0.95;
          b = dark * 0.9;
        }
      }
      ir[i] = static_cast<Real>(std::clamp(ir_v, 0.0, 1.0));
      vis[i] = static_cast<Real>(std::clamp(r, 0.0, 1.0));
      vis[n + i] = static_cast<Real>(std::clamp(g, 0.0, 1.0));
      vis[2 * n + i] = static_cast<Real>(std::clamp(b, 0.0, 1.0));
    }
  }
  return {Tensor({1, h, w}, std::move(ir)), Tensor({3, h, w}, std::move(vis)), Tensor({1, h, w}, std::move(mask))};
}

void write_synthetic_dataset(const std::filesystem::path& root, int n, std::int64_t h, std::int64_t w,
                             std::uint64_t seed) {
  Rng rng(seed);
  for (const char* sub : {"ir", "vis", "mask"}) std::filesystem::create_directories(root / sub);
  for (int k = 0; k < n; ++k) {
    const auto scene = generate_scene(rng, h, w);
    const auto name = fmt::format("{:04d}.png", k);
    write_png(root / "ir" / name, to_image8(scene.ir));
    write_png(root / "vis" / name, to_image8(scene.vis_rgb));
    write_png(root / "mask" / name, to_image8(scene.mask));
  }
}

}  // namespace sfd::imaging
