#include "sfd/net/dmrm.hpp"

#include <fmt/format.h>

#include "sfd/core/conv.hpp"
#include "sfd/core/error.hpp"
#include "sfd/core/ops.hpp"

namespace sfd::net {

DmrmParams DmrmParams::create(ParamSet& params, int d, Rng& rng, const std::string& prefix) {
  DmrmParams p;
  p.d = d;
  p.embed_ir = make_conv(params, prefix + ".embed_ir", 1, d, rng);
  p.embed_vis = make_conv(params, prefix + ".embed_vis", 1, d, rng);
  p.grad_ir = make_conv(params, prefix + ".grad_ir", d, d, rng);
  p.grad_vis = make_conv(params, prefix + ".grad_vis", d, d, rng);
  p.gate_ir = make_conv(params, prefix + ".gate_ir", d, d, rng);
  p.gate_vis = make_conv(params, prefix + ".gate_vis", d, d, rng);
  p.shared_ir = make_conv(params, prefix + ".shared_ir", d, d, rng);
  p.shared_vis = make_conv(params, prefix + ".shared_vis", d, d, rng);
  return p;
}

Tensor embed(const Tensor& image, const Conv3x3& conv) { return ops::relu(conv(image)); }

Tensor gradient_block(const Tensor& features, const Conv3x3& conv) {
  return conv(ops::gradient_magnitude(features));
}

Tensor attention_block(const Tensor& features, const Conv3x3& conv) {
  return ops::mul(features, ops::sigmoid(conv(features)));
}

DmrmOutput dmrm_forward(const Tensor& ir, const Tensor& vis, const DmrmParams& p) {
  if (ir.shape() != vis.shape()) {
    throw DimensionError(fmt::format("dmrm: infrared {} vs visible {}", shape_str(ir.shape()), shape_str(vis.shape())));
  }
  const Tensor f_ir = embed(ir, p.embed_ir);
  const Tensor f_vis = embed(vis, p.embed_vis);
  const Tensor both = ops::add(f_ir, f_vis);
  Tensor out_ir = ops::add(ops::add(gradient_block(f_ir, p.grad_ir), attention_block(f_ir, p.gate_ir)),
                           attention_block(both, p.shared_ir));
  Tensor out_vis = ops::add(ops::add(gradient_block(f_vis, p.grad_vis), attention_block(f_vis, p.gate_vis)),
                            attention_block(both, p.shared_vis));
  return {out_ir, out_vis};
}

}  // namespace sfd::net
