#include "doctest.h"

#include <cmath>

#include "sfd/core/error.hpp"
#include "sfd/metrics/metrics.hpp"
#include "sfd/selftest/oracles.hpp"
#include "test_util.hpp"

using namespace sfd;
using metrics::Plane;

namespace {

Plane constant(std::int64_t h, std::int64_t w, double v) { return {h, w, std::vector<double>(h * w, v)}; }

Plane random_plane(Rng& rng, std::int64_t h, std::int64_t w) {
  Plane p{h, w, {}};
  for (std::int64_t i = 0; i < h * w; ++i) p.v.push_back(std::round(rng.uniform(0, 255)));
  return p;
}

// Smooth structure plus noise, closer to an image than white noise.
Plane scene_plane(Rng& rng, std::int64_t h, std::int64_t w) {
  Plane p{h, w, {}};
  const double fx = rng.uniform(0.05, 0.3), fy = rng.uniform(0.05, 0.3);
  for (std::int64_t i = 0; i < h; ++i)
    for (std::int64_t j = 0; j < w; ++j) {
      const double v = 128 + 80 * std::sin(fx * j) * std::cos(fy * i) + rng.uniform(-20, 20);
      p.v.push_back(std::round(std::clamp(v, 0.0, 255.0)));
    }
  return p;
}

Plane pad_crop(const Plane& p, int border) {
  Plane big = constant(p.h + 2 * border, p.w + 2 * border, 0.0);
  for (std::int64_t i = 0; i < p.h; ++i)
    for (std::int64_t j = 0; j < p.w; ++j) big.v[(i + border) * big.w + j + border] = p.at(i, j);
  Plane out{p.h, p.w, {}};
  for (std::int64_t i = 0; i < p.h; ++i)
    for (std::int64_t j = 0; j < p.w; ++j) out.v.push_back(big.v[(i + border) * big.w + j + border]);
  return out;
}

Tensor to_tensor(const Plane& p) {
  std::vector<Real> v;
  for (double x : p.v) v.push_back(static_cast<Real>(x / 255.0));
  return Tensor({1, p.h, p.w}, v);
}

}  // namespace

TEST_CASE("constant image has zero EN, SD and SF") {
  auto c = constant(16, 20, 77);
  CHECK(metrics::entropy(c) == 0.0);
  CHECK(std::abs(metrics::standard_deviation(c)) < 1e-12);
  CHECK(metrics::spatial_frequency(c) == 0.0);
}

TEST_CASE("two-point histogram") {
  auto p = constant(8, 8, 0);
  for (int i = 0; i < 32; ++i) p.v[i] = 255;
  CHECK(std::abs(metrics::entropy(p) - 1.0) < 1e-12);
  CHECK(std::abs(metrics::standard_deviation(p) - 127.5) < 1e-9);
}

TEST_CASE("ramp over every level has entropy 8") {
  Plane p{16, 32, {}};
  for (int i = 0; i < 512; ++i) p.v.push_back(i % 256);
  CHECK(std::abs(metrics::entropy(p) - 8.0) < 1e-12);
}

TEST_CASE("unit-period vertical stripes") {
  Plane p{10, 12, {}};
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 12; ++j) p.v.push_back(j % 2 ? 255.0 : 0.0);
  CHECK(std::abs(metrics::spatial_frequency(p) - 255.0) < 1e-9);
}

TEST_CASE("EN, SD, SF and MI match the oracles on random planes") {
  Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    auto a = random_plane(rng, 23, 17), b = random_plane(rng, 23, 17);
    const auto qa = metrics::quantize(a), qb = metrics::quantize(b);
    CHECK(std::abs(metrics::entropy(a) - oracle::entropy(qa)) < 1e-9);
    CHECK(std::abs(metrics::standard_deviation(a) - oracle::stddev_two_pass(a.v)) < 1e-6);
    CHECK(std::abs(metrics::spatial_frequency(a) - oracle::spatial_frequency(a.v, 23, 17)) < 1e-6);
    CHECK(std::abs(metrics::mutual_information(a, b) - oracle::mutual_information(qa, qb)) < 1e-4);
  }
}

TEST_CASE("MI self case and constant source") {
  Rng rng(12);
  auto x = scene_plane(rng, 32, 32);
  CHECK(std::abs(metrics::mi(x, x, x) - 2 * metrics::entropy(x)) < 1e-6);
  CHECK(std::abs(metrics::mutual_information(x, constant(32, 32, 40))) < 1e-12);
}

TEST_CASE("VIF self case, noise and constant source") {
  Rng rng(13);
  auto x = scene_plane(rng, 48, 40);
  CHECK(std::abs(metrics::vif_single(x, x) - 1.0) < 1e-6);
  CHECK(std::abs(metrics::vif(x, x, x) - 2.0) < 1e-6);
  CHECK(metrics::vif_single(constant(48, 40, 90), x) == 0.0);
  double worst = 0;
  for (int s = 0; s < 8; ++s) {
    Rng nr(100 + s);
    worst = std::max(worst, metrics::vif_single(x, random_plane(nr, 48, 40)));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("VIF matches the direct-window oracle") {
  Rng rng(14);
  for (int t = 0; t < 3; ++t) {
    auto a = scene_plane(rng, 41, 37), b = scene_plane(rng, 41, 37);
    for (std::size_t i = 0; i < b.v.size(); ++i) b.v[i] = 0.5 * b.v[i] + 0.5 * a.v[i];
    const double got = metrics::vif_single(a, b);
    CHECK(std::abs(got - oracle::vif(a.v, b.v, 41, 37)) < 1e-9);
    CHECK(got > 0.0);
  }
}

TEST_CASE("Qabf ceiling, edgeless fusion and oracle") {
  Rng rng(15);
  auto x = scene_plane(rng, 32, 32);
  const double ceiling = metrics::qabf_ceiling();
  // both sigmoids evaluated at perfect preservation
  const double expect = metrics::kQgGamma / (1 + std::exp(metrics::kQgKappa * 0.5)) * metrics::kQaGamma /
                        (1 + std::exp(metrics::kQaKappa * 0.2));
  CHECK(std::abs(ceiling - expect) < 1e-15);
  CHECK(std::abs(ceiling - 0.974794) < 1e-6);
  CHECK(std::abs(metrics::qabf(x, x, x) - ceiling) < 1e-12);
  CHECK(metrics::qabf(constant(32, 32, 100), x, scene_plane(rng, 32, 32)) < 0.05);
  for (int t = 0; t < 4; ++t) {
    auto a = random_plane(rng, 19, 21), b = random_plane(rng, 19, 21), f = random_plane(rng, 19, 21);
    CHECK(std::abs(metrics::qabf(f, a, b) - oracle::qabf(a.v, b.v, f.v, 19, 21)) < 1e-4);
  }
}

TEST_CASE("source symmetry, ranges and padding invariance") {
  Rng rng(16);
  for (int t = 0; t < 40; ++t) {
    auto f = random_plane(rng, 20, 20), a = scene_plane(rng, 20, 20), b = random_plane(rng, 20, 20);
    CHECK(metrics::mi(f, a, b) == doctest::Approx(metrics::mi(f, b, a)).epsilon(1e-12));
    CHECK(metrics::vif(f, a, b) == doctest::Approx(metrics::vif(f, b, a)).epsilon(1e-12));
    CHECK(metrics::qabf(f, a, b) == doctest::Approx(metrics::qabf(f, b, a)).epsilon(1e-12));
    const double en = metrics::entropy(f), q = metrics::qabf(f, a, b);
    CHECK((en >= 0 && en <= 8));
    CHECK((q >= 0 && q <= 1));
    CHECK(metrics::mi(f, a, b) >= 0);
    CHECK(metrics::vif(f, a, b) >= 0);
    auto fp = pad_crop(f, 3), ap = pad_crop(a, 3), bp = pad_crop(b, 3);
    CHECK(metrics::entropy(fp) == en);
    CHECK(metrics::spatial_frequency(fp) == metrics::spatial_frequency(f));
    CHECK(metrics::qabf(fp, ap, bp) == q);
    CHECK(metrics::vif(fp, ap, bp) == metrics::vif(f, a, b));
  }
}

TEST_CASE("evaluate and CSV report") {
  Rng rng(17);
  auto x = scene_plane(rng, 24, 24);
  Tensor t = to_tensor(x);
  auto row = metrics::evaluate("0001", t, t, t);
  CHECK(std::abs(row.mi - 2 * row.en) < 1e-6);
  CHECK(std::abs(row.vif - 2.0) < 1e-6);
  CHECK(row.qabf > 0.97);
  auto c = metrics::evaluate("flat", Tensor::full({1, 24, 24}, 0.5f), t, t);
  CHECK(c.en == 0.0);
  CHECK(std::abs(c.sd) < 1e-9);
  CHECK(c.sf == 0.0);
  CHECK_THROWS_AS(metrics::evaluate("bad", t, Tensor::full({1, 24, 20}, 0.5f), t), DimensionError);

  metrics::MetricsReport rep{"synthetic", {row, c}};
  auto m = rep.mean();
  CHECK(m.id == "MEAN");
  CHECK(m.en == doctest::Approx((row.en + c.en) / 2));
  auto csv = metrics::to_csv(rep);
  CHECK(csv.rfind("id,en,sd,sf,mi,vif,qabf\n0001,", 0) == 0);
  CHECK(csv.find("\nMEAN,") != std::string::npos);
  auto dir = test::scratch_dir("metrics");
  metrics::write_csv(dir / "r.csv", rep);
  CHECK(std::filesystem::file_size(dir / "r.csv") == csv.size());
}
