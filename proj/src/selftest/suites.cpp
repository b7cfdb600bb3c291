#include "sfd/selftest/suites.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <fmt/format.h>

#include "sfd/core/conv.hpp"
#include "sfd/core/ops.hpp"
#include "sfd/core/rng.hpp"
#include "sfd/core/spectral.hpp"
#include "sfd/metrics/metrics.hpp"
#include "sfd/selftest/oracles.hpp"

namespace sfd::selftest {
namespace {

Tensor random_tensor(Rng& rng, Shape shape, double lo, double hi, bool param = false) {
  std::vector<Real> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(lo, hi));
  return param ? Tensor::parameter(std::move(shape), std::move(v)) : Tensor(std::move(shape), std::move(v));
}

CheckResult timed(std::string suite, std::string name, const std::function<std::pair<bool, std::string>()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r{std::move(suite), std::move(name), false, {}, 0};
  try {
    auto [ok, detail] = fn();
    r.pass = ok;
    r.detail = std::move(detail);
  } catch (const std::exception& e) {
    r.detail = fmt::format("threw: {}", e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

CheckResult grad_case(const std::string& name, const std::function<Tensor()>& loss,
                      const std::vector<std::pair<std::string, Tensor>>& params, std::size_t samples) {
  return timed("gradient", name, [&] {
    auto r = oracle::grad_check(loss, params, {.max_samples = samples});
    return std::pair{r.ok, fmt::format("worst rel {:.2e} ({})", r.worst_rel_error, r.worst_name)};
  });
}

}  // namespace

CheckResult check_fft() {
  return timed("fft", "fft2 vs naive DFT, roundtrip", [] {
    Rng rng(101);
    const std::pair<int, int> fixed[] = {{5, 7}, {31, 17}, {8, 8}, {16, 12}};
    double worst_dft = 0, worst_rt = 0;
    for (int k = 0; k < 20; ++k) {
      const auto [h, w] = k < 4 ? fixed[k] : std::pair<int, int>{2 + static_cast<int>(rng.below(30)),
                                                                  2 + static_cast<int>(rng.below(30))};
      Tensor x = random_tensor(rng, {h, w}, -1, 1);
      auto f = ops::fft2(x);
      std::vector<oracle::Cd> xc(x.data().begin(), x.data().end());
      auto ref = oracle::dft2(xc, h, w);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        worst_dft = std::max(worst_dft, std::abs(static_cast<double>(f.real.data()[i]) - ref[i].real()));
        worst_dft = std::max(worst_dft, std::abs(static_cast<double>(f.imag.data()[i]) - ref[i].imag()));
      }
      auto back = ops::ifft2_real(f);
      for (std::size_t i = 0; i < ref.size(); ++i)
        worst_rt = std::max(worst_rt, std::abs(static_cast<double>(back.data()[i]) - x.data()[i]));
    }
    return std::pair{worst_dft < 1e-4 && worst_rt < 1e-4,
                     fmt::format("max |fft - dft| {:.2e}, roundtrip {:.2e}", worst_dft, worst_rt)};
  });
}

CheckResult check_conv() {
  return timed("conv", "conv2d vs loop oracle", [] {
    Rng rng(102);
    double worst = 0;
    for (int k = 0; k < 4; ++k) {
      const int cin = 1 + static_cast<int>(rng.below(4)), cout = 1 + static_cast<int>(rng.below(4));
      const int h = 3 + static_cast<int>(rng.below(12)), w = 3 + static_cast<int>(rng.below(12));
      Tensor x = random_tensor(rng, {cin, h, w}, -1, 1);
      Tensor wt = random_tensor(rng, {cout, cin, 3, 3}, -1, 1);
      Tensor b = random_tensor(rng, {cout}, -1, 1);
      auto y = ops::conv2d(x, wt, b, 1);
      auto ref = oracle::conv2d({x.data().begin(), x.data().end()}, cin, h, w, {wt.data().begin(), wt.data().end()},
                                cout, 3, {b.data().begin(), b.data().end()}, 1);
      for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(y.data()[i] - ref[i]));
    }
    return std::pair{worst < 1e-5, fmt::format("max abs diff {:.2e}", worst)};
  });
}

std::vector<CheckResult> check_gradients() {
  std::vector<CheckResult> out;
  Rng rng(103);
  {
    Tensor x = random_tensor(rng, {2, 6, 5}, -1, 1, true);
    Tensor w = random_tensor(rng, {3, 2, 3, 3}, -1, 1, true);
    Tensor b = random_tensor(rng, {3}, -1, 1, true);
    Tensor p = random_tensor(rng, {3, 6, 5}, -1, 1);
    out.push_back(grad_case(
        "conv2d", [&] { return ops::sum(ops::mul(ops::conv2d(x, w, b, 1), p)); }, {{"x", x}, {"w", w}, {"b", b}}, 40));
  }
  {
    Tensor x = random_tensor(rng, {1, 7, 6}, 0, 1, true);
    Tensor p = random_tensor(rng, {1, 7, 6}, -1, 1);
    out.push_back(grad_case(
        "sobel gradient magnitude", [&] { return ops::sum(ops::mul(ops::gradient_magnitude(x), p)); }, {{"x", x}},
        42));
  }
  {
    Tensor x = random_tensor(rng, {1, 6, 5}, -1, 1, true);
    Tensor pa = random_tensor(rng, {1, 6, 5}, -1, 1), pp = random_tensor(rng, {1, 6, 5}, -1, 1);
    out.push_back(grad_case(
        "fft amplitude/phase roundtrip",
        [&] {
          auto polar = ops::amplitude_phase(ops::fft2(x));
          auto y = ops::ifft2_from_polar(ops::mul(polar.amp, ops::add_scalar(ops::scale(pa, 0.1f), 1.0f)), polar.pha);
          return ops::sum(ops::mul(y, pp));
        },
        {{"x", x}}, 30));
  }
  return out;
}

std::vector<CheckResult> check_metrics() {
  using metrics::Plane;
  std::vector<CheckResult> out;
  auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };
  out.push_back(timed("metrics", "EN/SD/SF analytic cases", [&] {
    Plane flat{8, 8, std::vector<double>(64, 90)};
    Plane two{8, 8, std::vector<double>(64, 0)};
    for (int i = 0; i < 32; ++i) two.v[i] = 255;
    Plane ramp{16, 16, {}};
    for (int i = 0; i < 256; ++i) ramp.v.push_back(i);
    Plane stripes{8, 8, {}};
    for (int i = 0; i < 64; ++i) stripes.v.push_back(i % 2 ? 255 : 0);
    const bool ok = metrics::entropy(flat) == 0 && near(metrics::standard_deviation(flat), 0, 1e-9) &&
                    metrics::spatial_frequency(flat) == 0 && near(metrics::entropy(two), 1.0, 1e-6) &&
                    near(metrics::standard_deviation(two), 127.5, 1e-6) && near(metrics::entropy(ramp), 8.0, 1e-6) &&
                    near(metrics::spatial_frequency(stripes), 255.0, 1e-6);
    return std::pair{ok, std::string(ok ? "" : "analytic value mismatch")};
  }));
  out.push_back(timed("metrics", "MI/VIF/Qabf self cases", [&] {
    Rng rng(104);
    Plane x{24, 24, {}};
    for (int i = 0; i < 24; ++i)
      for (int j = 0; j < 24; ++j) x.v.push_back(std::round(127 + 90 * std::sin(0.3 * i + 0.2 * j) + rng.uniform(-20, 20)));
    const double mi = metrics::mi(x, x, x), en = metrics::entropy(x), vif = metrics::vif_single(x, x);
    const double q = metrics::qabf(x, x, x);
    const bool ok = near(mi, 2 * en, 1e-6) && near(vif, 1.0, 1e-6) && near(q, metrics::qabf_ceiling(), 1e-9);
    return std::pair{ok, fmt::format("MI-2EN {:.1e}, VIF {:.6f}, Qabf {:.6f}", mi - 2 * en, vif, q)};
  }));
  out.push_back(timed("metrics", "random triples vs oracles", [&] {
    Rng rng(105);
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
      Plane a{15, 13, {}}, b{15, 13, {}}, f{15, 13, {}};
      for (int i = 0; i < 15 * 13; ++i) {
        a.v.push_back(std::round(rng.uniform(0, 255)));
        b.v.push_back(std::round(rng.uniform(0, 255)));
        f.v.push_back(std::round(rng.uniform(0, 255)));
      }
      const auto qa = metrics::quantize(a), qf = metrics::quantize(f);
      worst = std::max(worst, std::abs(metrics::entropy(f) - oracle::entropy(qf)));
      worst = std::max(worst, std::abs(metrics::standard_deviation(f) - oracle::stddev_two_pass(f.v)));
      worst = std::max(worst, std::abs(metrics::spatial_frequency(f) - oracle::spatial_frequency(f.v, 15, 13)));
      worst = std::max(worst, std::abs(metrics::mutual_information(f, a) - oracle::mutual_information(qf, qa)));
      worst = std::max(worst, std::abs(metrics::qabf(f, a, b) - oracle::qabf(a.v, b.v, f.v, 15, 13)));
      worst = std::max(worst, std::abs(metrics::vif_single(a, f) - oracle::vif(a.v, f.v, 15, 13)));
    }
    return std::pair{worst < 1e-4, fmt::format("max deviation {:.2e}", worst)};
  }));
  return out;
}

std::vector<CheckResult> run_all(const SelftestOptions& options) {
  std::vector<CheckResult> out;
  out.push_back(check_fft());
  out.push_back(check_conv());
  ops::testing::set_sobel_backward_fault(options.inject_sobel_fault);
  auto g = check_gradients();
  ops::testing::set_sobel_backward_fault(false);
  out.insert(out.end(), g.begin(), g.end());
  auto m = check_metrics();
  out.insert(out.end(), m.begin(), m.end());
  return out;
}

std::string format_table(const std::vector<CheckResult>& results) {
  std::string s;
  int failed = 0;
  for (const auto& r : results) {
    s += fmt::format("{:<4}  {:<9} {:<32} {:>7.2f}s  {}\n", r.pass ? "PASS" : "FAIL", r.suite, r.name, r.seconds,
                     r.detail);
    failed += r.pass ? 0 : 1;
  }
  s += fmt::format("{} checks, {} failed\n", results.size(), failed);
  return s;
}

}  // namespace sfd::selftest
