#include "sfd/core/conv.hpp"

#include <algorithm>
#include <Eigen/Core>
#include <atomic>
#include <cmath>
#include <fmt/format.h>

#include "sfd/core/autograd.hpp"
#include "sfd/core/ops.hpp"
#include "sfd/core/error.hpp"

namespace sfd::ops {
namespace {

using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct ConvGeom {
  std::int64_t cin, h, w, cout, k, pad, oh, ow;
  std::int64_t rows() const { return cin * k * k; }
  std::int64_t cols() const { return oh * ow; }
};

void im2col(const Real* x, const ConvGeom& g, Real* col) {
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        Real* dst = col + ((c * g.k + ky) * g.k + kx) * g.cols();
        for (std::int64_t oy = 0; oy < g.oh; ++oy) {
          const std::int64_t iy = oy + ky - g.pad;
          Real* row = dst + oy * g.ow;
          if (iy < 0 || iy >= g.h) {
            std::fill(row, row + g.ow, 0.0f);
            continue;
          }
          const Real* src = x + (c * g.h + iy) * g.w;
          for (std::int64_t ox = 0; ox < g.ow; ++ox) {
            const std::int64_t ix = ox + kx - g.pad;
            row[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const Real* col, const ConvGeom& g, Real* x) {
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const Real* src = col + ((c * g.k + ky) * g.k + kx) * g.cols();
        for (std::int64_t oy = 0; oy < g.oh; ++oy) {
          const std::int64_t iy = oy + ky - g.pad;
          if (iy < 0 || iy >= g.h) continue;
          Real* dst = x + (c * g.h + iy) * g.w;
          const Real* row = src + oy * g.ow;
          for (std::int64_t ox = 0; ox < g.ow; ++ox) {
            const std::int64_t ix = ox + kx - g.pad;
            if (ix >= 0 && ix < g.w) dst[ix] += row[ox];
          }
        }
      }
    }
  }
}

std::atomic<bool> g_sobel_fault{false};

constexpr Real kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
constexpr Real kSobelY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

// Depthwise 3x3 correlation of every channel; border pixels are replicated
// so a constant image has zero response everywhere.
void correlate3x3(const Real* x, std::int64_t c, std::int64_t h, std::int64_t w, const Real (&k)[3][3], Real* y) {
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const Real* xc = x + ch * h * w;
    Real* yc = y + ch * h * w;
    for (std::int64_t i = 0; i < h; ++i) {
      for (std::int64_t j = 0; j < w; ++j) {
        Real acc = 0.0f;
        for (int dy = 0; dy < 3; ++dy) {
          const std::int64_t ii = std::clamp<std::int64_t>(i + dy - 1, 0, h - 1);
          for (int dx = 0; dx < 3; ++dx) {
            const std::int64_t jj = std::clamp<std::int64_t>(j + dx - 1, 0, w - 1);
            acc += k[dy][dx] * xc[ii * w + jj];
          }
        }
        yc[i * w + j] = acc;
      }
    }
  }
}

// Adjoint of correlate3x3: scatter g back through the kernel.
void correlate3x3_adjoint(const Real* g, std::int64_t c, std::int64_t h, std::int64_t w, const Real (&k)[3][3],
                          Real sign, Real* dx) {
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const Real* gc = g + ch * h * w;
    Real* dc = dx + ch * h * w;
    for (std::int64_t i = 0; i < h; ++i) {
      for (std::int64_t j = 0; j < w; ++j) {
        const Real gv = sign * gc[i * w + j];
        if (gv == 0.0f) continue;
        for (int dy = 0; dy < 3; ++dy) {
          const std::int64_t ii = std::clamp<std::int64_t>(i + dy - 1, 0, h - 1);
          for (int ddx = 0; ddx < 3; ++ddx) {
            const std::int64_t jj = std::clamp<std::int64_t>(j + ddx - 1, 0, w - 1);
            dc[ii * w + jj] += k[dy][ddx] * gv;
          }
        }
      }
    }
  }
}

}  // namespace

namespace testing {
void set_sobel_backward_fault(bool enabled) { g_sobel_fault = enabled; }
}  // namespace testing

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int padding) {
  if (x.rank() != 3) throw DimensionError(fmt::format("conv2d: input must be C x H x W, got {}", shape_str(x.shape())));
  if (weight.rank() != 4 || weight.dim(2) != weight.dim(3)) {
    throw DimensionError(fmt::format("conv2d: weight must be C_out x C_in x k x k, got {}", shape_str(weight.shape())));
  }
  if (weight.dim(1) != x.dim(0)) {
    throw DimensionError(fmt::format("conv2d: input has {} channels but weight expects {}", x.dim(0), weight.dim(1)));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != weight.dim(0))) {
    throw DimensionError(fmt::format("conv2d: bias shape {} for {} output channels", shape_str(bias.shape()),
                                     weight.dim(0)));
  }
  if (padding < 0) throw ContractError("conv2d: negative padding");
  ConvGeom g{x.dim(0), x.dim(1), x.dim(2), weight.dim(0), weight.dim(2), padding, 0, 0};
  g.oh = g.h + 2 * g.pad - g.k + 1;
  g.ow = g.w + 2 * g.pad - g.k + 1;
  if (g.oh <= 0 || g.ow <= 0) throw DimensionError("conv2d: kernel larger than padded input");

  std::vector<Real> col(static_cast<std::size_t>(g.rows() * g.cols()));
  im2col(x.data().data(), g, col.data());
  std::vector<Real> y(static_cast<std::size_t>(g.cout * g.cols()));
  {
    ConstMapMat wm(weight.data().data(), g.cout, g.rows());
    ConstMapMat cm(col.data(), g.rows(), g.cols());
    MapMat ym(y.data(), g.cout, g.cols());
    ym.noalias() = wm * cm;
    if (bias.defined()) {
      auto b = bias.data();
      for (std::int64_t o = 0; o < g.cout; ++o) ym.row(o).array() += b[o];
    }
  }
  col = {};
  Tensor out = detail::make_result(Shape{g.cout, g.oh, g.ow}, std::move(y), "conv2d");

  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  detail::TensorImplPtr xi = x.impl(), wi = weight.impl(), bi = bias.defined() ? bias.impl() : nullptr;
  detail::record_op("conv2d", inputs, {out}, [xi, wi, bi, g, oi = std::weak_ptr(out.impl())]() {
    auto gout = detail::grad_of(oi.lock());
    ConstMapMat gm(gout.data(), g.cout, g.cols());
    if (bi && bi->requires_grad) {
      std::vector<Real> db(g.cout);
      for (std::int64_t o = 0; o < g.cout; ++o) db[o] = gm.row(o).sum();
      bi->accumulate_grad(db);
    }
    const bool need_w = wi->requires_grad, need_x = xi->requires_grad;
    if (!need_w && !need_x) return;
    std::vector<Real> colbuf(static_cast<std::size_t>(g.rows() * g.cols()));
    if (need_w) {
      im2col(xi->data.data(), g, colbuf.data());
      std::vector<Real> dw(static_cast<std::size_t>(g.cout * g.rows()));
      MapMat dwm(dw.data(), g.cout, g.rows());
      ConstMapMat cm(colbuf.data(), g.rows(), g.cols());
      dwm.noalias() = gm * cm.transpose();
      wi->accumulate_grad(dw);
    }
    if (need_x) {
      ConstMapMat wm(wi->data.data(), g.cout, g.rows());
      MapMat dcol(colbuf.data(), g.rows(), g.cols());
      dcol.noalias() = wm.transpose() * gm;
      std::vector<Real> dx(xi->data.size(), 0.0f);
      col2im(colbuf.data(), g, dx.data());
      xi->accumulate_grad(dx);
    }
  });
  return out;
}

std::pair<Tensor, Tensor> sobel_xy(const Tensor& x) {
  if (x.rank() != 3) throw DimensionError("sobel_xy expects C x H x W");
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h < 3 || w < 3) throw DimensionError(fmt::format("sobel_xy: image {} smaller than 3x3", shape_str(x.shape())));
  std::vector<Real> gx(x.data().size()), gy(x.data().size());
  correlate3x3(x.data().data(), c, h, w, kSobelX, gx.data());
  correlate3x3(x.data().data(), c, h, w, kSobelY, gy.data());
  Tensor tx = detail::make_result(x.shape(), std::move(gx), "sobel_x");
  Tensor ty = detail::make_result(x.shape(), std::move(gy), "sobel_y");
  detail::TensorImplPtr xi = x.impl();
  detail::record_op("sobel_xy", {x}, {tx, ty},
                    [xi, c, h, w, ox = std::weak_ptr(tx.impl()), oy = std::weak_ptr(ty.impl())]() {
                      std::vector<Real> dx(xi->data.size(), 0.0f);
                      const Real sign = g_sobel_fault ? -1.0f : 1.0f;
                      correlate3x3_adjoint(detail::grad_of(ox.lock()).data(), c, h, w, kSobelX, sign, dx.data());
                      correlate3x3_adjoint(detail::grad_of(oy.lock()).data(), c, h, w, kSobelY, 1.0f, dx.data());
                      xi->accumulate_grad(dx);
                    });
  return {tx, ty};
}

Tensor gradient_magnitude(const Tensor& x) {
  auto [gx, gy] = sobel_xy(x);
  return add(abs(gx), abs(gy));
}

std::vector<Real> gaussian_kernel1d(int size, double sigma) {
  if (size < 1 || sigma <= 0.0) throw ContractError("gaussian_kernel1d: bad size or sigma");
  std::vector<double> k(size);
  double total = 0.0;
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
    total += k[i];
  }
  std::vector<Real> out(size);
  for (int i = 0; i < size; ++i) out[i] = static_cast<Real>(k[i] / total);
  return out;
}

Tensor separable_filter_valid(const Tensor& x, const std::vector<Real>& kernel) {
  if (x.rank() != 3) throw DimensionError("separable_filter_valid expects C x H x W");
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const auto k = static_cast<std::int64_t>(kernel.size());
  if (h < k || w < k) {
    throw ContractError(fmt::format("separable_filter_valid: image {} smaller than window {}", shape_str(x.shape()), k));
  }
  const auto oh = h - k + 1, ow = w - k + 1;
  auto xd = x.data();
  std::vector<Real> tmp(static_cast<std::size_t>(c * h * ow));
  std::vector<Real> y(static_cast<std::size_t>(c * oh * ow));
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (std::int64_t i = 0; i < h; ++i) {
      const Real* src = xd.data() + (ch * h + i) * w;
      Real* dst = tmp.data() + (ch * h + i) * ow;
      for (std::int64_t j = 0; j < ow; ++j) {
        Real acc = 0.0f;
        for (std::int64_t t = 0; t < k; ++t) acc += kernel[t] * src[j + t];
        dst[j] = acc;
      }
    }
    for (std::int64_t i = 0; i < oh; ++i) {
      Real* dst = y.data() + (ch * oh + i) * ow;
      for (std::int64_t j = 0; j < ow; ++j) dst[j] = 0.0f;
      for (std::int64_t t = 0; t < k; ++t) {
        const Real* src = tmp.data() + (ch * h + i + t) * ow;
        for (std::int64_t j = 0; j < ow; ++j) dst[j] += kernel[t] * src[j];
      }
    }
  }
  Tensor out = detail::make_result(Shape{c, oh, ow}, std::move(y), "separable_filter_valid");
  detail::TensorImplPtr xi = x.impl();
  detail::record_op("separable_filter_valid", {x}, {out},
                    [xi, kernel, c, h, w, k, oh, ow, oi = std::weak_ptr(out.impl())]() {
                      auto g = detail::grad_of(oi.lock());
                      std::vector<Real> gt(static_cast<std::size_t>(c * h * ow), 0.0f);
                      std::vector<Real> dx(xi->data.size(), 0.0f);
                      for (std::int64_t ch = 0; ch < c; ++ch) {
                        for (std::int64_t i = 0; i < oh; ++i) {
                          const Real* gs = g.data() + (ch * oh + i) * ow;
                          for (std::int64_t t = 0; t < k; ++t) {
                            Real* dst = gt.data() + (ch * h + i + t) * ow;
                            for (std::int64_t j = 0; j < ow; ++j) dst[j] += kernel[t] * gs[j];
                          }
                        }
                        for (std::int64_t i = 0; i < h; ++i) {
                          const Real* gs = gt.data() + (ch * h + i) * ow;
                          Real* dst = dx.data() + (ch * h + i) * w;
                          for (std::int64_t j = 0; j < ow; ++j)
                            for (std::int64_t t = 0; t < k; ++t) dst[j + t] += kernel[t] * gs[j];
                        }
                      }
                      xi->accumulate_grad(dx);
                    });
  return out;
}

}  // namespace sfd::ops
