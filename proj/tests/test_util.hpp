#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "sfd/core/rng.hpp"
#include "sfd/core/tensor.hpp"

namespace sfd::test {

inline std::vector<Real> random_values(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::vector<Real> v(n);
  for (auto& x : v) x = static_cast<Real>(rng.uniform(lo, hi));
  return v;
}

inline Tensor random_tensor(Rng& rng, Shape shape, double lo = 0.0, double hi = 1.0) {
  auto n = static_cast<std::size_t>(shape_numel(shape));
  return Tensor(std::move(shape), random_values(rng, n, lo, hi));
}

inline Tensor random_param(Rng& rng, Shape shape, double lo = -0.5, double hi = 0.5) {
  auto n = static_cast<std::size_t>(shape_numel(shape));
  return Tensor::parameter(std::move(shape), random_values(rng, n, lo, hi));
}

inline std::vector<double> to_double(std::span<const Real> v) { return {v.begin(), v.end()}; }

inline double max_abs_diff(std::span<const Real> a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sfd_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace sfd::test
