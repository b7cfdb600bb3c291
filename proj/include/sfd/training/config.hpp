#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sfd/losses/losses.hpp"
#include "sfd/net/fusion.hpp"
#include "sfd/training/adam.hpp"

namespace sfd::training {

struct TrainConfig {
  int batch_size = 4;
  int epochs = 20;
  int crop = 128;
  std::uint64_t seed = 0;
  AdamConfig adam;
  /// Only "constant" is implemented.
  std::string lr_schedule = "constant";
  double clip_norm = 1.0;  // <= 0 disables clipping
  losses::LossWeights weights;
  bool fre_literal_sign = false;
  net::NetConfig net;
  /// At most this many pairs are used, in stem order; 0 means all.
  int max_pairs = 64;
  std::filesystem::path dataset;
  std::filesystem::path out_dir = "runs/default";
  /// Also keep epoch_NNN.sfdf next to last.sfdf.
  bool keep_epoch_checkpoints = false;
};

/// Throws ConfigError for out-of-range values.
void validate(const TrainConfig& config);

/// Every field as key/value text, in a fixed order. Paths are included.
std::vector<std::pair<std::string, std::string>> to_pairs(const TrainConfig& config);
std::string to_text(const TrainConfig& config);

/// Sets one field by key. Unknown keys and unparsable values throw ConfigError.
void set_field(TrainConfig& config, const std::string& key, const std::string& value);
/// `key=value` form of set_field.
void apply_override(TrainConfig& config, const std::string& assignment);

/// Flat `key = value` lines; `#` starts a comment. Fields not named keep
/// their defaults. Relative paths resolve against `base_dir`.
TrainConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
TrainConfig load_config(const std::filesystem::path& path);

losses::LossOptions loss_options(const TrainConfig& config);

}  // namespace sfd::training
