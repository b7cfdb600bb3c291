#include "sfd/losses/losses.hpp"

#include <cmath>
#include <fmt/format.h>

#include "sfd/core/autograd.hpp"
#include "sfd/core/conv.hpp"
#include "sfd/core/error.hpp"
#include "sfd/core/ops.hpp"
#include "sfd/core/spectral.hpp"

namespace sfd::losses {
namespace {

void require_planes(const Tensor& fused, const Tensor& ir, const Tensor& vis, const char* what) {
  if (fused.rank() != 3 || fused.dim(0) != 1 || ir.shape() != fused.shape() || vis.shape() != fused.shape()) {
    throw DimensionError(fmt::format("{}: expected matching 1 x H x W planes, got {}, {}, {}", what,
                                     shape_str(fused.shape()), shape_str(ir.shape()), shape_str(vis.shape())));
  }
}

Tensor complement(const Tensor& mask) { return ops::add_scalar(ops::scale(mask, -1), 1); }

Tensor mean_abs(const Tensor& x) { return ops::mean(ops::abs(x)); }

}  // namespace

void validate(const LossWeights& w) {
  for (double v : {w.lambda_s, w.alpha_1, w.alpha_2, w.beta}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("loss weights must be >= 0, got {}", v));
  }
}

Tensor loss_int(const Tensor& fused, const Tensor& ir, const Tensor& vis) {
  require_planes(fused, ir, vis, "loss_int");
  return mean_abs(ops::sub(fused, ops::maximum(ir, vis)));
}

Tensor loss_grad(const Tensor& fused, const Tensor& ir, const Tensor& vis) {
  require_planes(fused, ir, vis, "loss_grad");
  const Tensor target = ops::maximum(ops::gradient_magnitude(ir), ops::gradient_magnitude(vis));
  return mean_abs(ops::sub(ops::gradient_magnitude(fused), target));
}

Tensor ssim(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape() || a.rank() != 3) throw DimensionError("ssim: shape mismatch");
  if (a.dim(1) < kSsimWindow || a.dim(2) < kSsimWindow) {
    throw ContractError(fmt::format("ssim: image {} smaller than the {}x{} window", shape_str(a.shape()), kSsimWindow,
                                    kSsimWindow));
  }
  static const std::vector<Real> g = ops::gaussian_kernel1d(kSsimWindow, kSsimSigma);
  auto blur = [](const Tensor& x) { return ops::separable_filter_valid(x, g); };
  const Tensor mu_a = blur(a), mu_b = blur(b);
  const Tensor mu_aa = ops::mul(mu_a, mu_a), mu_bb = ops::mul(mu_b, mu_b), mu_ab = ops::mul(mu_a, mu_b);
  const Tensor var_a = ops::sub(blur(ops::mul(a, a)), mu_aa);
  const Tensor var_b = ops::sub(blur(ops::mul(b, b)), mu_bb);
  const Tensor cov = ops::sub(blur(ops::mul(a, b)), mu_ab);
  const Real c1 = static_cast<Real>(kSsimC1), c2 = static_cast<Real>(kSsimC2);
  const Tensor num = ops::mul(ops::add_scalar(ops::scale(mu_ab, 2), c1), ops::add_scalar(ops::scale(cov, 2), c2));
  const Tensor den = ops::mul(ops::add_scalar(ops::add(mu_aa, mu_bb), c1), ops::add_scalar(ops::add(var_a, var_b), c2));
  return ops::mean(ops::div(num, den));
}

Tensor loss_ssim(const Tensor& fused, const Tensor& ir, const Tensor& vis) {
  require_planes(fused, ir, vis, "loss_ssim");
  const Tensor s = ops::add(ssim(fused, ir), ssim(fused, vis));
  // (1 - s_ir)/2 + (1 - s_vis)/2 = 1 - (s_ir + s_vis)/2
  return ops::add_scalar(ops::scale(s, -0.5), 1);
}

Tensor loss_saliency(const Tensor& fused, const Tensor& ir, const Tensor& vis, const Tensor& mask, double beta) {
  require_planes(fused, ir, vis, "loss_saliency");
  if (mask.shape() != fused.shape()) throw DimensionError("loss_saliency: mask shape mismatch");
  const Tensor inv = complement(mask);
  const Tensor inside = mean_abs(ops::sub(ops::mul(mask, ir), ops::mul(mask, fused)));
  const Tensor outside = mean_abs(ops::sub(ops::mul(inv, vis), ops::mul(inv, fused)));
  return ops::add(ops::scale(inside, static_cast<Real>(beta)), outside);
}

Tensor masked_pearson(const Tensor& x, const Tensor& y, const Tensor& mask, double eps) {
  if (x.shape() != y.shape() || mask.shape() != x.shape()) throw DimensionError("masked_pearson: shape mismatch");
  auto xd = x.data(), yd = y.data(), md = mask.data();
  const std::size_t n_all = xd.size();
  double n = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n_all; ++i) {
    if (md[i] > 0.5f) {
      n += 1;
      sx += xd[i];
      sy += yd[i];
    }
  }
  if (n == 0) return detail::make_result({}, {Real(0)}, "masked_pearson");
  const double mx = sx / n, my = sy / n;
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < n_all; ++i) {
    if (md[i] > 0.5f) {
      const double dx = xd[i] - mx, dy = yd[i] - my;
      cov += dx * dy;
      vx += dx * dx;
      vy += dy * dy;
    }
  }
  cov /= n;
  vx = vx / n + eps;
  vy = vy / n + eps;
  const double s = std::sqrt(vx * vy);
  const double r = cov / s;
  Tensor out = detail::make_result({}, {static_cast<Real>(r)}, "masked_pearson");

  auto xi = x.impl(), yi = y.impl(), mi = mask.impl();
  detail::record_op("masked_pearson", {x, y}, {out},
                    [xi, yi, mi, n, mx, my, vx, vy, s, r, oi = std::weak_ptr(out.impl())]() {
                      const double g = detail::grad_of(oi.lock())[0];
                      // d r / d x_i = (y_i - my) / (n s) - r (x_i - mx) / (n vx), and symmetrically for y.
                      auto grad_for = [&](const detail::TensorImplPtr& self, const detail::TensorImplPtr& other,
                                          double m_self, double m_other, double v_self) {
                        if (!self->requires_grad) return;
                        std::vector<Real> gi(self->data.size(), Real(0));
                        for (std::size_t i = 0; i < gi.size(); ++i) {
                          if (mi->data[i] > 0.5f) {
                            const double d = (other->data[i] - m_other) / (n * s) -
                                             r * (self->data[i] - m_self) / (n * v_self);
                            gi[i] = static_cast<Real>(g * d);
                          }
                        }
                        self->accumulate_grad(gi);
                      };
                      grad_for(xi, yi, mx, my, vx);
                      grad_for(yi, xi, my, mx, vy);
                    });
  return out;
}

FreLoss loss_fre(const Tensor& freq_spatial, const Tensor& ir, const Tensor& vis, const Tensor& mask, FreSign sign) {
  require_planes(freq_spatial, ir, vis, "loss_fre");
  if (mask.shape() != ir.shape()) throw DimensionError("loss_fre: mask shape mismatch");
  double inside = 0;
  for (Real m : mask.data()) inside += m > 0.5f ? 1 : 0;
  FreLoss out;
  out.empty_region = inside == 0 || inside == static_cast<double>(mask.numel());
  const Tensor cc = ops::add(masked_pearson(freq_spatial, ir, mask), masked_pearson(freq_spatial, vis, complement(mask)));
  out.value = sign == FreSign::Corrected ? ops::add_scalar(ops::scale(cc, -1), 2) : cc;
  return out;
}

FreLoss loss_fre(const Tensor& amp, const Tensor& pha, const Tensor& ir, const Tensor& vis, const Tensor& mask,
                 FreSign sign) {
  return loss_fre(ops::ifft2_from_polar(amp, pha), ir, vis, mask, sign);
}

LossBreakdown combine(double l_int, double l_grad, double l_ssim, double l_saliency, double l_fre,
                      const LossWeights& w) {
  LossBreakdown b;
  b.l_int = l_int;
  b.l_grad = l_grad;
  b.l_content = w.alpha_1 * l_int + w.alpha_2 * l_grad;
  b.l_ssim = l_ssim;
  b.l_saliency = l_saliency;
  b.l_fre = l_fre;
  b.l_total = b.l_content + l_ssim + w.lambda_s * l_saliency + l_fre;
  return b;
}

LossTerms total_loss(const Tensor& fused, const Tensor& freq_spatial, const Tensor& ir, const Tensor& vis,
                     const Tensor& mask, const LossOptions& options) {
  const auto& w = options.weights;
  const Tensor li = loss_int(fused, ir, vis);
  const Tensor lg = loss_grad(fused, ir, vis);
  const Tensor ls = loss_ssim(fused, ir, vis);
  const Tensor lsal = loss_saliency(fused, ir, vis, mask, w.beta);
  Tensor total = ops::add(ops::add(ops::scale(li, static_cast<Real>(w.alpha_1)), ops::scale(lg, static_cast<Real>(w.alpha_2))),
                          ops::add(ls, ops::scale(lsal, static_cast<Real>(w.lambda_s))));
  double fre_value = 0.0;
  bool empty = false;
  if (options.use_lfre && freq_spatial.defined()) {
    auto fre = loss_fre(freq_spatial, ir, vis, mask, options.fre_sign);
    total = ops::add(total, fre.value);
    fre_value = fre.value.item();
    empty = fre.empty_region;
  }
  LossTerms out;
  out.total = total;
  out.breakdown = combine(li.item(), lg.item(), ls.item(), lsal.item(), fre_value, w);
  out.breakdown.fre_region_empty = empty;
  return out;
}

LossTerms total_loss(const net::ForwardResult& out, const Tensor& ir, const Tensor& vis, const Tensor& mask,
                     const LossOptions& options) {
  return total_loss(out.fused, out.freq_spatial, ir, vis, mask, options);
}

LossBreakdown mean_breakdown(const std::vector<LossBreakdown>& items) {
  LossBreakdown m;
  if (items.empty()) return m;
  for (const auto& b : items) {
    m.l_int += b.l_int;
    m.l_grad += b.l_grad;
    m.l_content += b.l_content;
    m.l_ssim += b.l_ssim;
    m.l_saliency += b.l_saliency;
    m.l_fre += b.l_fre;
    m.l_total += b.l_total;
    m.fre_region_empty = m.fre_region_empty || b.fre_region_empty;
  }
  const double k = static_cast<double>(items.size());
  m.l_int /= k;
  m.l_grad /= k;
  m.l_content /= k;
  m.l_ssim /= k;
  m.l_saliency /= k;
  m.l_fre /= k;
  m.l_total /= k;
  return m;
}

}  // namespace sfd::losses
