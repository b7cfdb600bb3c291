#include "sfd/metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <fmt/format.h>

#include "sfd/core/error.hpp"

namespace sfd::metrics {
namespace {

void require_same(const Plane& a, const Plane& b, const char* what) {
  if (a.h != b.h || a.w != b.w) {
    throw DimensionError(fmt::format("{}: {}x{} vs {}x{}", what, a.w, a.h, b.w, b.h));
  }
}

std::vector<double> gaussian(int n, double sigma) {
  std::vector<double> k(n);
  const double c = (n - 1) / 2.0;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    k[i] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
    total += k[i];
  }
  for (auto& x : k) x /= total;
  return k;
}

// 'valid' separable correlation with a symmetric kernel.
Plane filter_valid(const Plane& p, const std::vector<double>& k) {
  const auto n = static_cast<std::int64_t>(k.size());
  Plane tmp{p.h, p.w - n + 1, {}};
  tmp.v.assign(tmp.h * tmp.w, 0.0);
  for (std::int64_t i = 0; i < p.h; ++i)
    for (std::int64_t j = 0; j < tmp.w; ++j) {
      double acc = 0;
      for (std::int64_t t = 0; t < n; ++t) acc += k[t] * p.v[i * p.w + j + t];
      tmp.v[i * tmp.w + j] = acc;
    }
  Plane out{p.h - n + 1, tmp.w, {}};
  out.v.assign(out.h * out.w, 0.0);
  for (std::int64_t i = 0; i < out.h; ++i)
    for (std::int64_t t = 0; t < n; ++t)
      for (std::int64_t j = 0; j < out.w; ++j) out.v[i * out.w + j] += k[t] * tmp.v[(i + t) * tmp.w + j];
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

Plane downsample2(const Plane& p) {
  Plane out{(p.h + 1) / 2, (p.w + 1) / 2, {}};
  out.v.resize(out.h * out.w);
  for (std::int64_t i = 0; i < out.h; ++i)
    for (std::int64_t j = 0; j < out.w; ++j) out.v[i * out.w + j] = p.v[(2 * i) * p.w + 2 * j];
  return out;
}

struct EdgeMap {
  std::vector<double> strength, angle;
};

// Sobel strength and orientation, borders replicated.
EdgeMap edges(const Plane& p) {
  EdgeMap e;
  e.strength.resize(p.v.size());
  e.angle.resize(p.v.size());
  auto px = [&](std::int64_t i, std::int64_t j) {
    return p.v[std::clamp<std::int64_t>(i, 0, p.h - 1) * p.w + std::clamp<std::int64_t>(j, 0, p.w - 1)];
  };
  for (std::int64_t i = 0; i < p.h; ++i)
    for (std::int64_t j = 0; j < p.w; ++j) {
      const double sx = (px(i - 1, j + 1) + 2 * px(i, j + 1) + px(i + 1, j + 1)) -
                        (px(i - 1, j - 1) + 2 * px(i, j - 1) + px(i + 1, j - 1));
      const double sy = (px(i + 1, j - 1) + 2 * px(i + 1, j) + px(i + 1, j + 1)) -
                        (px(i - 1, j - 1) + 2 * px(i - 1, j) + px(i - 1, j + 1));
      e.strength[i * p.w + j] = std::sqrt(sx * sx + sy * sy);
      e.angle[i * p.w + j] = sx == 0.0 ? std::numbers::pi / 2 : std::atan(sy / sx);
    }
  return e;
}

double preservation(double gs, double as, double gf, double af) {
  const double g = std::max(gs, gf) == 0.0 ? 0.0 : std::min(gs, gf) / std::max(gs, gf);
  const double a = 1.0 - std::abs(as - af) / (std::numbers::pi / 2);
  const double qg = kQgGamma / (1.0 + std::exp(kQgKappa * (g - kQgSigma)));
  const double qa = kQaGamma / (1.0 + std::exp(kQaKappa * (a - kQaSigma)));
  return qg * qa;
}

}  // namespace

Plane to_plane(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 1) throw DimensionError(fmt::format("metrics: expected 1 x H x W, got {}", shape_str(t.shape())));
  Plane p{t.dim(1), t.dim(2), {}};
  p.v.reserve(static_cast<std::size_t>(t.numel()));
  for (Real x : t.data()) p.v.push_back(std::clamp(static_cast<double>(x), 0.0, 1.0) * 255.0);
  return p;
}

std::vector<int> quantize(const Plane& p) {
  std::vector<int> q(p.v.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = static_cast<int>(std::lround(std::clamp(p.v[i], 0.0, 255.0)));
  return q;
}

double entropy(const Plane& f) {
  std::array<double, 256> hist{};
  for (int v : quantize(f)) hist[v] += 1;
  const double n = static_cast<double>(f.v.size());
  double e = 0;
  for (double c : hist) {
    if (c > 0) e -= (c / n) * std::log2(c / n);
  }
  return e;
}

double standard_deviation(const Plane& f) {
  double m = 0;
  for (double x : f.v) m += x;
  m /= static_cast<double>(f.v.size());
  double s = 0;
  for (double x : f.v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(f.v.size()));
}

double spatial_frequency(const Plane& f) {
  double rf = 0, cf = 0;
  for (std::int64_t i = 0; i < f.h; ++i)
    for (std::int64_t j = 1; j < f.w; ++j) {
      const double d = f.at(i, j) - f.at(i, j - 1);
      rf += d * d;
    }
  for (std::int64_t i = 1; i < f.h; ++i)
    for (std::int64_t j = 0; j < f.w; ++j) {
      const double d = f.at(i, j) - f.at(i - 1, j);
      cf += d * d;
    }
  rf = f.w > 1 ? rf / static_cast<double>(f.h * (f.w - 1)) : 0.0;
  cf = f.h > 1 ? cf / static_cast<double>((f.h - 1) * f.w) : 0.0;
  return std::sqrt(rf + cf);
}

double mutual_information(const Plane& a, const Plane& b) {
  require_same(a, b, "mutual_information");
  const auto qa = quantize(a), qb = quantize(b);
  std::vector<double> joint(256 * 256, 0.0);
  std::array<double, 256> pa{}, pb{};
  for (std::size_t i = 0; i < qa.size(); ++i) {
    joint[qa[i] * 256 + qb[i]] += 1;
    pa[qa[i]] += 1;
    pb[qb[i]] += 1;
  }
  const double n = static_cast<double>(qa.size());
  double mi = 0;
  for (int x = 0; x < 256; ++x) {
    if (pa[x] == 0) continue;
    for (int y = 0; y < 256; ++y) {
      const double c = joint[x * 256 + y];
      if (c > 0) mi += (c / n) * std::log2(c * n / (pa[x] * pb[y]));
    }
  }
  return std::max(0.0, mi);
}

double vif_single(const Plane& ref_in, const Plane& dist_in) {
  require_same(ref_in, dist_in, "vif");
  constexpr double kNoise = 2.0;  // HVS noise variance
  constexpr double kTiny = 1e-10;
  Plane ref = ref_in, dist = dist_in;
  double num = 0, den = 0;
  for (int scale = 1; scale <= 4; ++scale) {
    const int n = (1 << (5 - scale)) + 1;  // 17, 9, 5, 3
    const auto win = gaussian(n, n / 5.0);
    if (scale > 1) {
      if (ref.h < n || ref.w < n) break;
      ref = downsample2(filter_valid(ref, win));
      dist = downsample2(filter_valid(dist, win));
    }
    if (ref.h < n || ref.w < n) break;
    const Plane mu1 = filter_valid(ref, win), mu2 = filter_valid(dist, win);
    const Plane s11 = filter_valid(product(ref, ref), win);
    const Plane s22 = filter_valid(product(dist, dist), win);
    const Plane s12 = filter_valid(product(ref, dist), win);
    for (std::size_t i = 0; i < mu1.v.size(); ++i) {
      double var1 = std::max(0.0, s11.v[i] - mu1.v[i] * mu1.v[i]);
      const double var2 = std::max(0.0, s22.v[i] - mu2.v[i] * mu2.v[i]);
      const double cov = s12.v[i] - mu1.v[i] * mu2.v[i];
      double g = cov / (var1 + kTiny);
      double sv = var2 - g * cov;
      if (var1 < kTiny) {
        g = 0;
        sv = var2;
        var1 = 0;
      }
      if (var2 < kTiny) {
        g = 0;
        sv = 0;
      }
      if (g < 0) {
        sv = var2;
        g = 0;
      }
      sv = std::max(sv, kTiny);
      num += std::log2(1 + g * g * var1 / (sv + kNoise));
      den += std::log2(1 + var1 / kNoise);
    }
  }
  return den <= 0 ? 0.0 : num / den;
}

double qabf_ceiling() { return preservation(1, 0, 1, 0); }

double mi(const Plane& fused, const Plane& ir, const Plane& vis) {
  return mutual_information(fused, ir) + mutual_information(fused, vis);
}

double vif(const Plane& fused, const Plane& ir, const Plane& vis) {
  return vif_single(ir, fused) + vif_single(vis, fused);
}

double qabf(const Plane& fused, const Plane& ir, const Plane& vis) {
  require_same(fused, ir, "qabf");
  require_same(fused, vis, "qabf");
  const EdgeMap ea = edges(ir), eb = edges(vis), ef = edges(fused);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < fused.v.size(); ++i) {
    const double wa = ea.strength[i], wb = eb.strength[i];
    num += preservation(wa, ea.angle[i], ef.strength[i], ef.angle[i]) * wa +
           preservation(wb, eb.angle[i], ef.strength[i], ef.angle[i]) * wb;
    den += wa + wb;
  }
  return den == 0 ? 0.0 : num / den;
}

MetricsRow evaluate(const std::string& id, const Tensor& fused, const Tensor& ir, const Tensor& vis) {
  const Plane f = to_plane(fused), a = to_plane(ir), b = to_plane(vis);
  require_same(f, a, "evaluate");
  require_same(f, b, "evaluate");
  MetricsRow r;
  r.id = id;
  r.en = entropy(f);
  r.sd = standard_deviation(f);
  r.sf = spatial_frequency(f);
  r.mi = mi(f, a, b);
  r.vif = vif(f, a, b);
  r.qabf = qabf(f, a, b);
  return r;
}

MetricsRow MetricsReport::mean() const {
  MetricsRow m;
  m.id = "MEAN";
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.en += r.en;
    m.sd += r.sd;
    m.sf += r.sf;
    m.mi += r.mi;
    m.vif += r.vif;
    m.qabf += r.qabf;
  }
  const double n = static_cast<double>(rows.size());
  m.en /= n;
  m.sd /= n;
  m.sf /= n;
  m.mi /= n;
  m.vif /= n;
  m.qabf /= n;
  return m;
}

std::string to_csv(const MetricsReport& report) {
  std::string out = "id,en,sd,sf,mi,vif,qabf\n";
  auto line = [](const MetricsRow& r) {
    return fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.id, r.en, r.sd, r.sf, r.mi, r.vif, r.qabf);
  };
  for (const auto& r : report.rows) out += line(r);
  out += line(report.mean());
  return out;
}

void write_csv(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream f(path);
  if (!f) throw IoError(fmt::format("cannot write {}", path.string()));
  f << to_csv(report);
  if (!f) throw IoError(fmt::format("write failed for {}", path.string()));
}

}  // namespace sfd::metrics
