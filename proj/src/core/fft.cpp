#include "sfd/core/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sfd/core/error.hpp"

namespace sfd::fft {
namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Plan1d::Plan1d(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
  if (n == 0) throw ContractError("fft plan of length 0");
  m_ = pow2_ ? n : next_pow2(2 * n - 1);

  bitrev_.resize(m_);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < m_) ++bits;
  for (std::size_t i = 0; i < m_; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(m_ / 2);
  for (std::size_t k = 0; k < m_ / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m_);
    twiddle_[k] = {std::cos(a), std::sin(a)};
  }

  if (!pow2_) {
    chirp_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      // k^2 mod 2n keeps the angle small and exact in integer arithmetic
      const std::size_t k2 = (k * k) % (2 * n_);
      const double a = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n_);
      chirp_[k] = {std::cos(a), std::sin(a)};
    }
    chirp_spectrum_.assign(m_, Complex{});
    chirp_spectrum_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n_; ++k) {
      chirp_spectrum_[k] = std::conj(chirp_[k]);
      chirp_spectrum_[m_ - k] = std::conj(chirp_[k]);
    }
    radix2(chirp_spectrum_);
  }
}

void Plan1d::radix2(std::span<Complex> a) const {
  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= m; len <<= 1) {
    const std::size_t half = len / 2, stride = m / len;
    for (std::size_t s = 0; s < m; s += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex t = twiddle_[k * stride] * a[s + k + half];
        a[s + k + half] = a[s + k] - t;
        a[s + k] += t;
      }
    }
  }
}

void Plan1d::bluestein(std::span<Complex> data) const {
  std::vector<Complex> buf(m_, Complex{});
  for (std::size_t k = 0; k < n_; ++k) buf[k] = data[k] * chirp_[k];
  radix2(buf);
  for (std::size_t k = 0; k < m_; ++k) buf[k] = std::conj(buf[k] * chirp_spectrum_[k]);
  // inverse via conjugation: ifft(z) = conj(fft(conj(z))) / m
  radix2(buf);
  const double inv_m = 1.0 / static_cast<double>(m_);
  for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(buf[k]) * inv_m * chirp_[k];
}

void Plan1d::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw DimensionError("fft: data length does not match plan");
  if (n_ == 1) return;
  if (pow2_) radix2(data);
  else bluestein(data);
}

void Plan1d::inverse(std::span<Complex> data) const {
  for (auto& v : data) v = std::conj(v);
  forward(data);
  for (auto& v : data) v = std::conj(v);
}

std::shared_ptr<const Plan1d> plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const Plan1d>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const Plan1d>(n);
  return slot;
}

void transform2d(std::vector<Complex>& data, std::size_t h, std::size_t w, bool inverse) {
  if (data.size() != h * w) throw DimensionError("transform2d: buffer does not match H x W");
  auto row_plan = plan_for(w);
  for (std::size_t r = 0; r < h; ++r) {
    std::span<Complex> row(data.data() + r * w, w);
    if (inverse) row_plan->inverse(row);
    else row_plan->forward(row);
  }
  auto col_plan = plan_for(h);
  std::vector<Complex> col(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) col[r] = data[r * w + c];
    if (inverse) col_plan->inverse(col);
    else col_plan->forward(col);
    for (std::size_t r = 0; r < h; ++r) data[r * w + c] = col[r];
  }
}

}  // namespace sfd::fft
