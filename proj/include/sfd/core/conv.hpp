#pragma once

#include <array>
#include <utility>
#include <vector>

#include "sfd/core/tensor.hpp"

namespace sfd::ops {

/// 2D cross-correlation, stride 1, zero padding.
///
/// x: C_in x H x W, weight: C_out x C_in x k x k, bias: C_out (may be
/// undefined for no bias). Output is C_out x (H + 2p - k + 1) x (W + 2p - k + 1);
/// padding = (k - 1) / 2 keeps the input size.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int padding);

/// Per-channel 3x3 Sobel responses, same size as the input, with the border
/// replicated (a constant image gives zero everywhere).
/// X kernel [[-1,0,1],[-2,0,2],[-1,0,1]]; Y kernel is its transpose.
std::pair<Tensor, Tensor> sobel_xy(const Tensor& x);

/// |sobel_x(x)| + |sobel_y(x)|
Tensor gradient_magnitude(const Tensor& x);

/// Per-channel separable filter with the same 1D kernel along rows and
/// columns, "valid" mode: output is C x (H - K + 1) x (W - K + 1).
Tensor separable_filter_valid(const Tensor& x, const std::vector<Real>& kernel);

/// Normalized 1D Gaussian taps.
std::vector<Real> gaussian_kernel1d(int size, double sigma);

namespace testing {
/// Flips the sign of the Sobel X kernel inside sobel_xy's backward pass.
/// Used to check that gradient verification catches a broken adjoint.
void set_sobel_backward_fault(bool enabled);
}  // namespace testing

}  // namespace sfd::ops
