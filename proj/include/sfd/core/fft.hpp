#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace sfd::fft {

using Complex = std::complex<double>;

/// Unnormalized 1D DFT of a fixed length.
///
/// Powers of two run an iterative radix-2 Cooley-Tukey transform; every other
/// length goes through Bluestein's chirp-z reformulation on a power-of-two
/// convolution of length >= 2n - 1. Results are exact DFTs of the input
/// length, with no padding visible to the caller.
class Plan1d {
 public:
  explicit Plan1d(std::size_t n);

  std::size_t size() const { return n_; }
  /// X[k] = sum_j x[j] exp(-2 pi i jk / n), in place.
  void forward(std::span<Complex> data) const;
  /// x[j] = sum_k X[k] exp(+2 pi i jk / n), in place, without the 1/n factor.
  void inverse(std::span<Complex> data) const;

 private:
  void radix2(std::span<Complex> data) const;
  void bluestein(std::span<Complex> data) const;

  std::size_t n_;
  bool pow2_;
  // radix-2 tables for the power-of-two length actually transformed
  std::size_t m_ = 0;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;
  // Bluestein: chirp exp(-i pi k^2 / n) and the transformed conjugate chirp
  std::vector<Complex> chirp_;
  std::vector<Complex> chirp_spectrum_;
};

/// Shared, cached plan for length n. Thread safe.
std::shared_ptr<const Plan1d> plan_for(std::size_t n);

/// Row-major H x W 2D transform in place; inverse omits the 1/(H W) factor.
void transform2d(std::vector<Complex>& data, std::size_t h, std::size_t w, bool inverse);

}  // namespace sfd::fft
