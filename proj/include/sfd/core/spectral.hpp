#pragma once

#include "sfd/core/tensor.hpp"

// Differentiable 2D spectral operations on single-channel planes. A plane
// is an H x W or 1 x H x W tensor; outputs keep the input's shape.
namespace sfd::ops {

/// Real and imaginary planes of a 2D spectrum.
struct ComplexField {
  Tensor real;
  Tensor imag;
};

struct PolarField {
  Tensor amp;
  Tensor pha;
};

/// Gradient guard added to |z|^2 in amplitude/phase derivatives.
inline constexpr double kPolarEps = 1e-8;

/// F[u,v] = sum x[h,w] exp(-2 pi i (uh/H + vw/W)) for any H, W >= 1.
ComplexField fft2(const Tensor& x);

/// amp = |z|, pha = atan2(im, re) in (-pi, pi]; zero bins give (0, 0).
PolarField amplitude_phase(const ComplexField& f);

ComplexField polar_to_complex(const Tensor& amp, const Tensor& pha);

/// Real part of the inverse DFT with 1/(H W) normalization.
Tensor ifft2_real(const ComplexField& f);

/// ifft2_real(polar_to_complex(amp, pha)).
Tensor ifft2_from_polar(const Tensor& amp, const Tensor& pha);

}  // namespace sfd::ops
