#include "sfd/training/adam.hpp"

#include <cmath>
#include <fmt/format.h>

#include "sfd/core/error.hpp"

namespace sfd::training {

AdamState make_adam_state(const net::ParamSet& params) {
  AdamState s;
  for (const auto& p : params.items()) {
    s.m.emplace_back(static_cast<std::size_t>(p.value.numel()), Real(0));
    s.v.emplace_back(static_cast<std::size_t>(p.value.numel()), Real(0));
  }
  return s;
}

void adam_step(net::ParamSet& params, AdamState& state, const AdamConfig& config) {
  const auto& items = params.items();
  if (state.m.size() != items.size() || state.v.size() != items.size()) {
    throw ContractError(fmt::format("adam: state holds {} buffers for {} parameters", state.m.size(), items.size()));
  }
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto n = static_cast<std::size_t>(items[k].value.numel());
    if (state.m[k].size() != n || state.v[k].size() != n) {
      throw ContractError(fmt::format("adam: moment size mismatch for {}", items[k].name));
    }
    if (!items[k].value.has_grad()) continue;
    const auto g = items[k].value.grad();
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError(fmt::format("adam: non-finite gradient in {} at entry {} (step {})", items[k].name, i,
                                       state.step + 1));
      }
    }
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < items.size(); ++k) {
    Tensor p = items[k].value;
    auto w = p.mutable_data();
    const bool has = p.has_grad();
    const auto g = has ? p.grad() : std::span<const Real>{};
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = has ? static_cast<double>(g[i]) : 0.0;
      const double mi = config.beta1 * m[i] + (1 - config.beta1) * gi;
      const double vi = config.beta2 * v[i] + (1 - config.beta2) * gi * gi;
      m[i] = static_cast<Real>(mi);
      v[i] = static_cast<Real>(vi);
      w[i] = static_cast<Real>(w[i] - config.lr * (mi / c1) / (std::sqrt(vi / c2) + config.eps));
    }
  }
}

double grad_norm(const net::ParamSet& params) {
  double s = 0;
  for (const auto& p : params.items()) {
    if (!p.value.has_grad()) continue;
    for (Real g : p.value.grad()) s += static_cast<double>(g) * g;
  }
  return std::sqrt(s);
}

void scale_grads(net::ParamSet& params, double factor) {
  for (const auto& p : params.items()) {
    if (!p.value.has_grad()) continue;
    for (Real& g : p.value.impl()->grad) g = static_cast<Real>(g * factor);
  }
}

}  // namespace sfd::training
