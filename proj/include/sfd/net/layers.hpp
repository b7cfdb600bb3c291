#pragma once

#include <string>
#include <vector>

#include "sfd/core/rng.hpp"
#include "sfd/core/tensor.hpp"

namespace sfd::net {

/// Negative slope for every Leaky ReLU in the network.
inline constexpr Real kLeakySlope = 0.2f;

struct NamedParam {
  std::string name;
  Tensor value;
};

/// Flat, ordered registry of trainable tensors. Order is creation order and
/// is what the checkpoint format and optimizer state rely on.
class ParamSet {
 public:
  Tensor add(std::string name, Tensor value);
  const std::vector<NamedParam>& items() const { return items_; }
  /// Throws ContractError for an unknown name.
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::int64_t count() const;
  void zero_grad();

 private:
  std::vector<NamedParam> items_;
};

/// 3x3 convolution with bias and same padding.
struct Conv3x3 {
  Tensor weight;  // out x in x 3 x 3
  Tensor bias;    // out
  Tensor operator()(const Tensor& x) const;
  int in_channels() const { return static_cast<int>(weight.dim(1)); }
  int out_channels() const { return static_cast<int>(weight.dim(0)); }
};

/// Registers `<name>.weight` and `<name>.bias`. Weights are He-uniform for
/// the Leaky ReLU slope, biases uniform in +-1/sqrt(fan_in).
Conv3x3 make_conv(ParamSet& params, const std::string& name, int in, int out, Rng& rng);

/// Looks up an existing `<name>.weight` / `<name>.bias` pair.
Conv3x3 find_conv(const ParamSet& params, const std::string& name);

}  // namespace sfd::net
