#pragma once

#include <cstdint>
#include <optional>

#include "sfd/imaging/pair.hpp"
#include "sfd/net/dmrm.hpp"
#include "sfd/net/fdfm.hpp"

namespace sfd::net {

struct AblationConfig {
  bool use_dmrm = true;
  bool use_fdfm = true;
  /// Consumed by the loss, carried here so a checkpoint records it.
  bool use_lfre = true;
};

struct NetConfig {
  int d = 32;
  int c = 16;
  bool log_amplitude = true;
  AblationConfig ablation;
};

/// Throws ConfigError for non-positive widths, odd d, or both branches off.
void validate(const NetConfig& config);

struct ForwardResult {
  Tensor fused;         // 1 x H x W in (0,1)
  Tensor freq_spatial;  // frequency branch plane before aggregation; undefined without it
};

/// The full fusion network. Copies share parameter storage.
struct FusionNet {
  NetConfig config;
  ParamSet params;
  std::optional<DmrmParams> dmrm;
  std::optional<FdfmParams> fdfm;
  Conv3x3 head1, head2, head3, head4;  // concat -> d -> d -> d/2 -> 1

  static FusionNet create(const NetConfig& config, std::uint64_t seed);

  /// ir and vis: 1 x H x W luma planes with H, W >= 8. Output 1 x H x W in (0,1).
  Tensor forward(const Tensor& ir, const Tensor& vis) const { return run(ir, vis).fused; }
  ForwardResult run(const Tensor& ir, const Tensor& vis) const;
  Tensor forward(const imaging::ImagePair& pair) const { return forward(pair.ir, pair.vis_y); }
};

/// Fused luma recombined with the visible chroma, 3 x H x W in [0,1].
Tensor fuse_to_rgb(const FusionNet& net, const imaging::ImagePair& pair);

/// Total scalar count over all weights and biases.
std::int64_t param_count(const FusionNet& net);

}  // namespace sfd::net
