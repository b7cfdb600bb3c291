#pragma once

#include "sfd/core/spectral.hpp"
#include "sfd/net/layers.hpp"

namespace sfd::net {

/// Two 3x3 convs (2 -> c -> 1), Leaky ReLU after each.
struct SpectralStack {
  Conv3x3 first;
  Conv3x3 second;
  Tensor operator()(const Tensor& two_planes) const;
};

/// Frequency branch weights. `c` is the inner width of both stacks.
struct FdfmParams {
  int c = 16;
  int d = 32;
  /// Amplitudes pass through log1p before the amplitude stack and expm1 after.
  bool log_amplitude = true;
  SpectralStack amp;
  SpectralStack pha;
  Conv3x3 post;  // 2 -> d

  static FdfmParams create(ParamSet& params, int c, int d, bool log_amplitude, Rng& rng,
                           const std::string& prefix = "fdfm");
};

/// Amplitude and phase of the 2D DFT of a 1 x H x W image.
ops::PolarField spectrum(const Tensor& image);

/// Fuses the two modalities' spectra, amplitude and phase separately.
ops::PolarField fuse_spectra(const ops::PolarField& ir, const ops::PolarField& vis, const FdfmParams& p);

/// Intermediate values of one frequency-branch pass.
struct FdfmTrace {
  ops::PolarField fused;
  Tensor spatial;  // 1 x H x W, inverse transform of the fused spectrum
  Tensor out;      // d x H x W
};

FdfmTrace fdfm_trace(const Tensor& ir, const Tensor& vis, const FdfmParams& p);
Tensor fdfm_forward(const Tensor& ir, const Tensor& vis, const FdfmParams& p);

}  // namespace sfd::net
