// Criterion 2 helper, linked against the double-precision libraries.
// Prints one summary line and exits 0 when every check passes.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <fmt/format.h>

#include "sfd/core/ops.hpp"
#include "sfd/core/rng.hpp"
#include "sfd/losses/losses.hpp"
#include "sfd/net/fusion.hpp"
#include "sfd/selftest/oracles.hpp"

using namespace sfd;

namespace {

constexpr double kStep = 1e-3;
constexpr double kTolerance = 1e-2;
constexpr int kSize = 16;
constexpr int kBatch = 2;

Tensor plane(Rng& rng, double lo, double hi, bool leaf) {
  std::vector<Real> v(kSize * kSize);
  for (auto& x : v) x = static_cast<Real>(rng.uniform(lo, hi));
  return leaf ? Tensor::parameter({1, kSize, kSize}, v) : Tensor({1, kSize, kSize}, v);
}

struct Item {
  Tensor fused, freq, ir, vis, mask;
};

std::vector<Item> make_batch(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Item> batch;
  for (int k = 0; k < kBatch; ++k) {
    Item it{plane(rng, 0.05, 0.95, true), plane(rng, -1, 1, true), plane(rng, 0, 1, false), plane(rng, 0, 1, false), {}};
    std::vector<Real> m(kSize * kSize);
    for (int i = 0; i < kSize * kSize; ++i) m[i] = ((i / kSize) / 4 + (i % kSize) / 4) % 2 ? Real(1) : Real(0);
    it.mask = Tensor({1, kSize, kSize}, m);
    batch.push_back(it);
  }
  return batch;
}

struct Outcome {
  std::string name;
  oracle::GradCheckResult result;
};

}  // namespace

int main() {
  static_assert(sizeof(Real) == 8, "build against the _f64 libraries");
  const auto t0 = std::chrono::steady_clock::now();
  oracle::GradCheckOptions opt;
  opt.step = kStep;
  opt.tolerance = kTolerance;
  opt.max_samples = 24;
  std::vector<Outcome> outcomes;

  auto batch = make_batch(21);
  auto check_loss = [&](const std::string& name, const std::function<Tensor(const Item&)>& f, bool freq) {
    std::vector<std::pair<std::string, Tensor>> leaves;
    for (int k = 0; k < kBatch; ++k) {
      leaves.emplace_back(fmt::format("fused{}", k), batch[k].fused);
      if (freq) leaves.emplace_back(fmt::format("freq{}", k), batch[k].freq);
    }
    auto loss = [&] {
      Tensor total = Tensor::scalar(0);
      for (const auto& it : batch) total = ops::add(total, f(it));
      return ops::scale(total, Real(1) / kBatch);
    };
    outcomes.push_back({name, oracle::grad_check(loss, leaves, opt)});
  };
  losses::LossWeights w;
  losses::LossOptions lo;
  check_loss("intensity", [](const Item& it) { return losses::loss_int(it.fused, it.ir, it.vis); }, false);
  check_loss("gradient", [](const Item& it) { return losses::loss_grad(it.fused, it.ir, it.vis); }, false);
  check_loss("content", [&](const Item& it) {
    return ops::add(ops::scale(losses::loss_int(it.fused, it.ir, it.vis), static_cast<Real>(w.alpha_1)),
                    ops::scale(losses::loss_grad(it.fused, it.ir, it.vis), static_cast<Real>(w.alpha_2)));
  }, false);
  check_loss("ssim", [](const Item& it) { return losses::loss_ssim(it.fused, it.ir, it.vis); }, false);
  check_loss("saliency", [&](const Item& it) { return losses::loss_saliency(it.fused, it.ir, it.vis, it.mask, w.beta); },
             false);
  check_loss("frequency", [](const Item& it) { return losses::loss_fre(it.freq, it.ir, it.vis, it.mask).value; }, true);
  check_loss("total", [&](const Item& it) { return losses::total_loss(it.fused, it.freq, it.ir, it.vis, it.mask, lo).total; },
             true);

  // Full network, default widths, trained through the total loss.
  auto net = net::FusionNet::create({}, 9);
  auto net_batch = make_batch(22);
  std::vector<std::pair<std::string, Tensor>> params;
  for (const auto& p : net.params.items()) params.emplace_back(p.name, p.value);
  auto net_loss = [&] {
    Tensor total = Tensor::scalar(0);
    for (const auto& it : net_batch) {
      auto out = net.run(it.ir, it.vis);
      total = ops::add(total, losses::total_loss(out, it.ir, it.vis, it.mask, lo).total);
    }
    return ops::scale(total, Real(1) / kBatch);
  };
  auto net_opt = opt;
  net_opt.max_samples = 6;
  outcomes.push_back({"network", oracle::grad_check(net_loss, params, net_opt)});

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = true;
  double worst = 0;
  std::string worst_name;
  std::size_t skipped = 0, tensors = 0;
  for (const auto& o : outcomes) {
    ok = ok && o.result.ok;
    for (const auto& t : o.result.tensors) {
      skipped += t.skipped;
      ++tensors;
    }
    if (o.result.worst_rel_error >= worst) {
      worst = o.result.worst_rel_error;
      worst_name = o.name + "/" + o.result.worst_name;
    }
    if (!o.result.ok) std::fprintf(stderr, "gradient check failed: %s (%s)\n", o.name.c_str(), o.result.worst_name.c_str());
  }
  std::printf("%s 7 losses + full network (%zu tensors, 16x16, batch 2): worst rel %.2e at %s, %zu kink skips, %.1f s\n",
              ok ? "PASS" : "FAIL", tensors, worst, worst_name.c_str(), skipped, secs);
  return ok ? 0 : 1;
}
