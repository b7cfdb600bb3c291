#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sfd/core/tensor.hpp"

// Slow, direct reference implementations. Nothing here calls into the
// optimized code paths it is used to check.
namespace sfd::oracle {

using Cd = std::complex<double>;

/// Naive O(N^2) 2D DFT, F[u,v] = sum x exp(-2 pi i (uh/H + vw/W)).
std::vector<Cd> dft2(const std::vector<Cd>& x, std::size_t h, std::size_t w);
/// Real part of the naive inverse DFT with 1/(H W) normalization.
std::vector<double> idft2_real(const std::vector<Cd>& f, std::size_t h, std::size_t w);

/// Six-nested-loop convolution (cross-correlation), zero padding.
std::vector<double> conv2d(const std::vector<Real>& x, std::int64_t cin, std::int64_t h, std::int64_t w,
                           const std::vector<Real>& weight, std::int64_t cout, std::int64_t k,
                           const std::vector<Real>& bias, int padding);

/// Direct Sobel application with replicated borders, returns (gx, gy) per channel.
std::pair<std::vector<double>, std::vector<double>> sobel(const std::vector<Real>& x, std::int64_t c, std::int64_t h,
                                                          std::int64_t w);

/// SSIM by explicit 2D window sums at each valid position.
double ssim(const std::vector<double>& a, const std::vector<double>& b, std::int64_t h, std::int64_t w,
            int window = 11, double sigma = 1.5, double c1 = 1e-4, double c2 = 9e-4);

/// Pearson correlation over pixels with mask == 1 (f64).
double masked_pearson(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& mask,
                      double eps = 1e-8);

/// Otsu threshold by evaluating between-class variance at every level.
int otsu_exhaustive(const std::vector<int>& levels);

// Metric oracles on 8-bit levels (0..255).
double entropy(const std::vector<int>& q);
double stddev_two_pass(const std::vector<double>& v);
double spatial_frequency(const std::vector<double>& v, std::int64_t h, std::int64_t w);
double mutual_information(const std::vector<int>& a, const std::vector<int>& b);
double qabf(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& f, std::int64_t h,
            std::int64_t w);
/// Pixel-domain VIF with explicit 2D Gaussian windows and per-scale
/// decimation, values on the 0..255 scale.
double vif(const std::vector<double>& ref, const std::vector<double>& dist, std::int64_t h, std::int64_t w);

struct GradCheckOptions {
  double step = 1e-3;
  double tolerance = 1e-2;
  /// Entries per tensor; tensors at most this large are checked exhaustively.
  std::size_t max_samples = 12;
  std::uint64_t seed = 7;
  /// Times the step is divided by 10 for an entry whose perturbation
  /// crosses a kink before that entry is dropped.
  int kink_retries = 2;
};

struct GradCheckTensorResult {
  std::string name;
  std::size_t samples = 0;
  /// Entries evaluated at a reduced step because the configured one crossed a kink.
  std::size_t reduced = 0;
  /// Entries dropped because every step tried crossed a kink.
  std::size_t skipped = 0;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
  double rel_error = 0.0;
};

struct GradCheckResult {
  bool ok = true;
  double worst_rel_error = 0.0;
  std::string worst_name;
  std::vector<GradCheckTensorResult> tensors;
};

/// Compares tape gradients with central finite differences.
///
/// `loss_fn` rebuilds the loss from the current parameter values. For each
/// named leaf tensor, sampled entries are perturbed by +/- step and the
/// relative error ||a - n|| / max(||a||, ||n||) over the sampled entries is
/// compared with the tolerance. A perturbation that moves any piecewise op
/// input across a non-differentiable point (see kinks.hpp) does not estimate
/// the derivative; the entry is retried at smaller steps and, failing that,
/// dropped in favour of another draw. When both norms fall below `1e-6` the tensor
/// is treated as having zero gradient and passes if the difference does too.
GradCheckResult grad_check(const std::function<Tensor()>& loss_fn,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           const GradCheckOptions& options = {});

}  // namespace sfd::oracle
