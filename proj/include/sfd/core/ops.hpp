#pragma once

#include <vector>

#include "sfd/core/tensor.hpp"

// Differentiable elementwise, reduction and channel operations. Binary ops
// require identical shapes; there is no broadcasting.
namespace sfd::ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
/// Elementwise max; the gradient goes to `a` on ties.
Tensor maximum(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, Real s);
Tensor add_scalar(const Tensor& a, Real s);

Tensor abs(const Tensor& a);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, Real negative_slope);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log1p(const Tensor& a);
Tensor expm1(const Tensor& a);

/// Sum of all elements as a scalar (accumulated in double).
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Concatenate C x H x W tensors along the channel axis.
Tensor concat_channels(const std::vector<Tensor>& parts);
/// Per-pixel max / mean over channels of a C x H x W tensor; result 1 x H x W.
Tensor channel_max(const Tensor& x);
Tensor channel_mean(const Tensor& x);

/// Reinterpret storage with a new shape of equal element count.
Tensor reshape(const Tensor& a, Shape shape);

}  // namespace sfd::ops
