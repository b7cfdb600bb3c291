#include "sfd/core/spectral.hpp"

#include <cmath>
#include <numbers>
#include <fmt/format.h>

#include "sfd/core/autograd.hpp"
#include "sfd/core/error.hpp"
#include "sfd/core/kinks.hpp"
#include "sfd/core/fft.hpp"

namespace sfd::ops {
namespace {

using fft::Complex;

std::pair<std::size_t, std::size_t> plane_hw(const Tensor& t, const char* op) {
  const auto& s = t.shape();
  if (s.size() == 2) return {static_cast<std::size_t>(s[0]), static_cast<std::size_t>(s[1])};
  if (s.size() == 3 && s[0] == 1) return {static_cast<std::size_t>(s[1]), static_cast<std::size_t>(s[2])};
  throw DimensionError(fmt::format("{}: expected an H x W or 1 x H x W plane, got {}", op, shape_str(s)));
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("{}: shape mismatch {} vs {}", op, shape_str(a.shape()), shape_str(b.shape())));
  }
}

}  // namespace

ComplexField fft2(const Tensor& x) {
  auto [h, w] = plane_hw(x, "fft2");
  auto xd = x.data();
  std::vector<Complex> buf(h * w);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = xd[i];
  fft::transform2d(buf, h, w, false);
  std::vector<Real> re(buf.size()), im(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    re[i] = static_cast<Real>(buf[i].real());
    im[i] = static_cast<Real>(buf[i].imag());
  }
  ComplexField out{detail::make_result(x.shape(), std::move(re), "fft2"),
                   detail::make_result(x.shape(), std::move(im), "fft2")};
  detail::record_op("fft2", {x}, {out.real, out.imag},
                    [xi = x.impl(), h, w, ro = std::weak_ptr(out.real.impl()), io = std::weak_ptr(out.imag.impl())]() {
                      auto gr = detail::grad_of(ro.lock());
                      auto gi = detail::grad_of(io.lock());
                      std::vector<Complex> g(h * w);
                      for (std::size_t i = 0; i < g.size(); ++i) g[i] = {gr[i], gi[i]};
                      fft::transform2d(g, h, w, true);
                      std::vector<Real> dx(g.size());
                      for (std::size_t i = 0; i < g.size(); ++i) dx[i] = static_cast<Real>(g[i].real());
                      xi->accumulate_grad(dx);
                    });
  return out;
}

PolarField amplitude_phase(const ComplexField& f) {
  require_same(f.real, f.imag, "amplitude_phase");
  auto re = f.real.data(), im = f.imag.data();
  std::vector<Real> amp(re.size()), pha(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) {
    const double a = re[i], b = im[i];
    amp[i] = static_cast<Real>(std::sqrt(a * a + b * b));
    double p = (a == 0.0 && b == 0.0) ? 0.0 : std::atan2(b, a);
    if (p <= -std::numbers::pi) p = std::numbers::pi;
    pha[i] = static_cast<Real>(p);
  }
  // The phase jumps by 2 pi across the negative real axis.
  kinks::record(re.size(), [&](std::size_t i) { return re[i] < 0.0f ? (im[i] < 0.0f ? 0 : 2) : 1; });
  PolarField out{detail::make_result(f.real.shape(), std::move(amp), "amplitude"),
                 detail::make_result(f.real.shape(), std::move(pha), "phase")};
  detail::record_op(
      "amplitude_phase", {f.real, f.imag}, {out.amp, out.pha},
      [ri = f.real.impl(), ii = f.imag.impl(), ao = std::weak_ptr(out.amp.impl()),
       po = std::weak_ptr(out.pha.impl())]() {
        auto ga = detail::grad_of(ao.lock());
        auto gp = detail::grad_of(po.lock());
        const std::size_t n = ri->data.size();
        std::vector<Real> dre(n), dim(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double a = ri->data[i], b = ii->data[i];
          const double s = a * a + b * b + kPolarEps;
          const double r = std::sqrt(s);
          dre[i] = static_cast<Real>(ga[i] * a / r - gp[i] * b / s);
          dim[i] = static_cast<Real>(ga[i] * b / r + gp[i] * a / s);
        }
        if (ri->requires_grad) ri->accumulate_grad(dre);
        if (ii->requires_grad) ii->accumulate_grad(dim);
      });
  return out;
}

ComplexField polar_to_complex(const Tensor& amp, const Tensor& pha) {
  require_same(amp, pha, "polar_to_complex");
  auto a = amp.data(), p = pha.data();
  std::vector<Real> re(a.size()), im(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    re[i] = static_cast<Real>(a[i] * std::cos(static_cast<double>(p[i])));
    im[i] = static_cast<Real>(a[i] * std::sin(static_cast<double>(p[i])));
  }
  ComplexField out{detail::make_result(amp.shape(), std::move(re), "polar_to_complex"),
                   detail::make_result(amp.shape(), std::move(im), "polar_to_complex")};
  detail::record_op("polar_to_complex", {amp, pha}, {out.real, out.imag},
                    [ai = amp.impl(), pi = pha.impl(), ro = std::weak_ptr(out.real.impl()),
                     io = std::weak_ptr(out.imag.impl())]() {
                      auto gr = detail::grad_of(ro.lock());
                      auto gi = detail::grad_of(io.lock());
                      const std::size_t n = ai->data.size();
                      std::vector<Real> da(n), dp(n);
                      for (std::size_t i = 0; i < n; ++i) {
                        const double c = std::cos(static_cast<double>(pi->data[i]));
                        const double s = std::sin(static_cast<double>(pi->data[i]));
                        const double m = ai->data[i];
                        da[i] = static_cast<Real>(gr[i] * c + gi[i] * s);
                        dp[i] = static_cast<Real>(m * (gi[i] * c - gr[i] * s));
                      }
                      if (ai->requires_grad) ai->accumulate_grad(da);
                      if (pi->requires_grad) pi->accumulate_grad(dp);
                    });
  return out;
}

Tensor ifft2_real(const ComplexField& f) {
  require_same(f.real, f.imag, "ifft2_real");
  auto [h, w] = plane_hw(f.real, "ifft2_real");
  auto re = f.real.data(), im = f.imag.data();
  std::vector<Complex> buf(h * w);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = {re[i], im[i]};
  fft::transform2d(buf, h, w, true);
  const double inv = 1.0 / static_cast<double>(h * w);
  std::vector<Real> y(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) y[i] = static_cast<Real>(buf[i].real() * inv);
  Tensor out = detail::make_result(f.real.shape(), std::move(y), "ifft2_real");
  detail::record_op("ifft2_real", {f.real, f.imag}, {out},
                    [ri = f.real.impl(), ii = f.imag.impl(), h, w, inv, oi = std::weak_ptr(out.impl())]() {
                      auto g = detail::grad_of(oi.lock());
                      std::vector<Complex> z(h * w);
                      for (std::size_t i = 0; i < z.size(); ++i) z[i] = g[i];
                      fft::transform2d(z, h, w, false);
                      std::vector<Real> dre(z.size()), dim(z.size());
                      for (std::size_t i = 0; i < z.size(); ++i) {
                        dre[i] = static_cast<Real>(z[i].real() * inv);
                        dim[i] = static_cast<Real>(z[i].imag() * inv);
                      }
                      if (ri->requires_grad) ri->accumulate_grad(dre);
                      if (ii->requires_grad) ii->accumulate_grad(dim);
                    });
  return out;
}

Tensor ifft2_from_polar(const Tensor& amp, const Tensor& pha) { return ifft2_real(polar_to_complex(amp, pha)); }

}  // namespace sfd::ops
