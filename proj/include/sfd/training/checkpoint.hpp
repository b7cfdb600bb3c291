#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfd/net/fusion.hpp"
#include "sfd/training/adam.hpp"

namespace sfd::training {

inline constexpr char kCheckpointMagic[4] = {'S', 'F', 'D', 'F'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

/// File layout: "SFDF", u32 version, u64 header length, a JSON header
/// (network config, training config, tensor table with byte offsets), then
/// the payload of little-endian f32 arrays. Adam moments, when present,
/// follow the parameters as `adam.m/<name>` and `adam.v/<name>`.
struct Checkpoint {
  net::NetConfig net;
  /// Training configuration snapshot as key/value text.
  std::vector<std::pair<std::string, std::string>> train_config;
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  std::vector<TensorRecord> params;
  std::optional<AdamState> adam;
};

Checkpoint make_checkpoint(const net::FusionNet& net, const AdamState* adam = nullptr);

std::vector<std::uint8_t> encode(const Checkpoint& ckpt);
/// Throws CheckpointError on bad magic, version, header or truncation.
Checkpoint decode(const std::vector<std::uint8_t>& bytes);

/// Writes to a temporary file and renames it over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Builds the network described by the checkpoint and copies its weights.
net::FusionNet restore_net(const Checkpoint& ckpt);
/// Copies weights into an existing network. Throws CheckpointError naming
/// every tensor whose shape differs, and for missing or extra names.
void load_weights(net::FusionNet& net, const Checkpoint& ckpt);

}  // namespace sfd::training
