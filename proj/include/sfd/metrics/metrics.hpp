#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sfd/core/tensor.hpp"

// Fusion quality metrics. Everything here runs in double precision on the
// 0..255 intensity scale.
namespace sfd::metrics {

struct Plane {
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::vector<double> v;  // row-major, 0..255

  double at(std::int64_t i, std::int64_t j) const { return v[i * w + j]; }
};

/// 1 x H x W tensor in [0,1] to a 0..255 plane (values clamped to [0,1] first).
Plane to_plane(const Tensor& t);
/// Rounds to the nearest 8-bit level.
std::vector<int> quantize(const Plane& p);

/// Shannon entropy (bits) of the 256-bin histogram.
double entropy(const Plane& f);
/// Population standard deviation.
double standard_deviation(const Plane& f);
/// sqrt(RF^2 + CF^2) over horizontal and vertical first differences.
double spatial_frequency(const Plane& f);
/// Mutual information (bits) from the 256 x 256 joint histogram.
double mutual_information(const Plane& a, const Plane& b);

/// Pixel-domain multi-scale VIF of `dist` against `ref`. A constant
/// reference carries no information and gives 0.
double vif_single(const Plane& ref, const Plane& dist);

inline constexpr double kQgGamma = 0.9994, kQgKappa = -15.0, kQgSigma = 0.5;
inline constexpr double kQaGamma = 0.9879, kQaKappa = -22.0, kQaSigma = 0.8;

/// Edge-preservation value of a perfect copy: both sigmoids at their best.
double qabf_ceiling();

// Two-source forms.
double mi(const Plane& fused, const Plane& ir, const Plane& vis);
double vif(const Plane& fused, const Plane& ir, const Plane& vis);
double qabf(const Plane& fused, const Plane& ir, const Plane& vis);

struct MetricsRow {
  std::string id;
  double en = 0, sd = 0, sf = 0, mi = 0, vif = 0, qabf = 0;
};

/// All six metrics for one fused image. Planes must share their size.
MetricsRow evaluate(const std::string& id, const Tensor& fused, const Tensor& ir, const Tensor& vis);

struct MetricsReport {
  std::string dataset;
  std::vector<MetricsRow> rows;

  /// Column means, id "MEAN".
  MetricsRow mean() const;
};

/// Header `id,en,sd,sf,mi,vif,qabf`, one row per image and a final MEAN row.
std::string to_csv(const MetricsReport& report);
void write_csv(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace sfd::metrics
