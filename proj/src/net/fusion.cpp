#include "sfd/net/fusion.hpp"

#include <fmt/format.h>

#include "sfd/core/error.hpp"
#include "sfd/core/ops.hpp"
#include "sfd/imaging/color.hpp"

namespace sfd::net {

void validate(const NetConfig& config) {
  if (config.d < 2 || config.d % 2 != 0) throw ConfigError(fmt::format("embedding width must be even and >= 2, got {}", config.d));
  if (config.c < 1) throw ConfigError(fmt::format("spectral width must be >= 1, got {}", config.c));
  if (!config.ablation.use_dmrm && !config.ablation.use_fdfm) {
    throw ConfigError("at least one of the spatial and frequency branches must be enabled");
  }
}

FusionNet FusionNet::create(const NetConfig& config, std::uint64_t seed) {
  validate(config);
  Rng rng(seed);
  FusionNet net;
  net.config = config;
  const int d = config.d;
  int concat = 0;
  if (config.ablation.use_dmrm) {
    net.dmrm = DmrmParams::create(net.params, d, rng);
    concat += 2 * d;
  }
  if (config.ablation.use_fdfm) {
    net.fdfm = FdfmParams::create(net.params, config.c, d, config.log_amplitude, rng);
    concat += d;
  }
  net.head1 = make_conv(net.params, "head.conv1", concat, d, rng);
  net.head2 = make_conv(net.params, "head.conv2", d, d, rng);
  net.head3 = make_conv(net.params, "head.conv3", d, d / 2, rng);
  net.head4 = make_conv(net.params, "head.conv4", d / 2, 1, rng);
  return net;
}

ForwardResult FusionNet::run(const Tensor& ir, const Tensor& vis) const {
  if (ir.rank() != 3 || ir.dim(0) != 1 || ir.shape() != vis.shape()) {
    throw DimensionError(fmt::format("forward: expected two 1 x H x W planes, got {} and {}", shape_str(ir.shape()),
                                     shape_str(vis.shape())));
  }
  if (ir.dim(1) < 8 || ir.dim(2) < 8) {
    throw DimensionError(fmt::format("forward: images must be at least 8 x 8, got {}", shape_str(ir.shape())));
  }
  ForwardResult result;
  std::vector<Tensor> parts;
  if (dmrm) {
    auto f = dmrm_forward(ir, vis, *dmrm);
    parts.push_back(f.ir);
    parts.push_back(f.vis);
  }
  if (fdfm) {
    auto trace = fdfm_trace(ir, vis, *fdfm);
    result.freq_spatial = trace.spatial;
    parts.push_back(trace.out);
  }
  Tensor x = ops::concat_channels(parts);
  x = ops::leaky_relu(head1(x), kLeakySlope);
  x = ops::leaky_relu(head2(x), kLeakySlope);
  x = ops::leaky_relu(head3(x), kLeakySlope);
  result.fused = ops::sigmoid(head4(x));
  return result;
}

Tensor fuse_to_rgb(const FusionNet& net, const imaging::ImagePair& pair) {
  return imaging::recombine_color(net.forward(pair), pair.vis_cb, pair.vis_cr);
}

std::int64_t param_count(const FusionNet& net) { return net.params.count(); }

}  // namespace sfd::net
