#include "sfd/net/layers.hpp"

#include <cmath>
#include <fmt/format.h>

#include "sfd/core/conv.hpp"
#include "sfd/core/error.hpp"

namespace sfd::net {

Tensor ParamSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ContractError(fmt::format("duplicate parameter '{}'", name));
  value.set_requires_grad(true);
  items_.push_back({std::move(name), value});
  return value;
}

const Tensor& ParamSet::get(const std::string& name) const {
  for (const auto& p : items_) {
    if (p.name == name) return p.value;
  }
  throw ContractError(fmt::format("unknown parameter '{}'", name));
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& p : items_) {
    if (p.name == name) return true;
  }
  return false;
}

std::int64_t ParamSet::count() const {
  std::int64_t n = 0;
  for (const auto& p : items_) n += p.value.numel();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& p : items_) p.value.zero_grad();
}

Tensor Conv3x3::operator()(const Tensor& x) const { return ops::conv2d(x, weight, bias, 1); }

Conv3x3 make_conv(ParamSet& params, const std::string& name, int in, int out, Rng& rng) {
  const double fan_in = static_cast<double>(in) * 9.0;
  const double gain = std::sqrt(2.0 / (1.0 + static_cast<double>(kLeakySlope) * kLeakySlope));
  const double w_bound = gain * std::sqrt(3.0 / fan_in);
  const double b_bound = 1.0 / std::sqrt(fan_in);
  std::vector<Real> w(static_cast<std::size_t>(out) * in * 9), b(static_cast<std::size_t>(out));
  for (auto& v : w) v = static_cast<Real>(rng.uniform(-w_bound, w_bound));
  for (auto& v : b) v = static_cast<Real>(rng.uniform(-b_bound, b_bound));
  Conv3x3 c;
  c.weight = params.add(name + ".weight", Tensor::parameter({out, in, 3, 3}, std::move(w)));
  c.bias = params.add(name + ".bias", Tensor::parameter({out}, std::move(b)));
  return c;
}

Conv3x3 find_conv(const ParamSet& params, const std::string& name) {
  return {params.get(name + ".weight"), params.get(name + ".bias")};
}

}  // namespace sfd::net
