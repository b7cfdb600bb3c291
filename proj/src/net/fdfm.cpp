#include "sfd/net/fdfm.hpp"

#include <fmt/format.h>

#include "sfd/core/error.hpp"
#include "sfd/core/ops.hpp"

namespace sfd::net {

Tensor SpectralStack::operator()(const Tensor& two_planes) const {
  return ops::leaky_relu(second(ops::leaky_relu(first(two_planes), kLeakySlope)), kLeakySlope);
}

FdfmParams FdfmParams::create(ParamSet& params, int c, int d, bool log_amplitude, Rng& rng, const std::string& prefix) {
  FdfmParams p;
  p.c = c;
  p.d = d;
  p.log_amplitude = log_amplitude;
  p.amp = {make_conv(params, prefix + ".amp1", 2, c, rng), make_conv(params, prefix + ".amp2", c, 1, rng)};
  p.pha = {make_conv(params, prefix + ".pha1", 2, c, rng), make_conv(params, prefix + ".pha2", c, 1, rng)};
  p.post = make_conv(params, prefix + ".post", 2, d, rng);
  return p;
}

ops::PolarField spectrum(const Tensor& image) { return ops::amplitude_phase(ops::fft2(image)); }

ops::PolarField fuse_spectra(const ops::PolarField& ir, const ops::PolarField& vis, const FdfmParams& p) {
  if (ir.amp.shape() != vis.amp.shape()) throw DimensionError("fuse_spectra: spectra differ in shape");
  Tensor amp_in = ops::concat_channels({ir.amp, vis.amp});
  if (p.log_amplitude) amp_in = ops::log1p(amp_in);
  Tensor amp = p.amp(amp_in);
  if (p.log_amplitude) amp = ops::expm1(amp);
  Tensor pha = p.pha(ops::concat_channels({ir.pha, vis.pha}));
  return {amp, pha};
}

FdfmTrace fdfm_trace(const Tensor& ir, const Tensor& vis, const FdfmParams& p) {
  if (ir.rank() != 3 || ir.dim(0) != 1 || ir.shape() != vis.shape()) {
    throw DimensionError(fmt::format("fdfm: expected two 1 x H x W planes, got {} and {}", shape_str(ir.shape()),
                                     shape_str(vis.shape())));
  }
  FdfmTrace t;
  t.fused = fuse_spectra(spectrum(ir), spectrum(vis), p);
  t.spatial = ops::ifft2_from_polar(t.fused.amp, t.fused.pha);
  // Channel max and mean of a single plane are the plane itself; kept so the
  // aggregation matches the multi-channel form.
  t.out = p.post(ops::concat_channels({ops::channel_max(t.spatial), ops::channel_mean(t.spatial)}));
  return t;
}

Tensor fdfm_forward(const Tensor& ir, const Tensor& vis, const FdfmParams& p) { return fdfm_trace(ir, vis, p).out; }

}  // namespace sfd::net
