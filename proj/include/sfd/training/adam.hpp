#pragma once

#include <cstdint>
#include <vector>

#include "sfd/net/layers.hpp"

namespace sfd::training {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment buffers in parameter registration order.
struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<Real>> m;
  std::vector<std::vector<Real>> v;
};

/// Zeroed moments shaped like `params`.
AdamState make_adam_state(const net::ParamSet& params);

/// One bias-corrected Adam update from the gradients stored on `params`.
/// A parameter without a gradient is treated as having a zero gradient.
/// Any non-finite gradient throws NumericError before anything is modified.
void adam_step(net::ParamSet& params, AdamState& state, const AdamConfig& config);

/// Global L2 norm over all parameter gradients, accumulated in double.
double grad_norm(const net::ParamSet& params);
/// Multiplies every stored gradient by `factor`.
void scale_grads(net::ParamSet& params, double factor);

}  // namespace sfd::training
