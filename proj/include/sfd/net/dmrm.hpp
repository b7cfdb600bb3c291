#pragma once

#include <utility>

#include "sfd/net/layers.hpp"

namespace sfd::net {

/// Spatial refinement branch weights. `d` is the embedding width.
struct DmrmParams {
  int d = 32;
  Conv3x3 embed_ir, embed_vis;    // 1 -> d
  Conv3x3 grad_ir, grad_vis;      // d -> d after the gradient magnitude
  Conv3x3 gate_ir, gate_vis;      // d -> d attention gates
  Conv3x3 shared_ir, shared_vis;  // d -> d gates on the summed features

  static DmrmParams create(ParamSet& params, int d, Rng& rng, const std::string& prefix = "dmrm");
};

/// ReLU(conv(i)).
Tensor embed(const Tensor& image, const Conv3x3& conv);

/// conv(|sobel_x(f)| + |sobel_y(f)|).
Tensor gradient_block(const Tensor& features, const Conv3x3& conv);

/// f * sigmoid(conv(f)).
Tensor attention_block(const Tensor& features, const Conv3x3& conv);

struct DmrmOutput {
  Tensor ir;
  Tensor vis;
};

/// Returns the refined infrared and visible features, each d x H x W.
DmrmOutput dmrm_forward(const Tensor& ir, const Tensor& vis, const DmrmParams& p);

}  // namespace sfd::net
