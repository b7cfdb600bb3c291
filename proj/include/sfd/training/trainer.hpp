#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sfd/imaging/pair.hpp"
#include "sfd/losses/losses.hpp"
#include "sfd/net/fusion.hpp"
#include "sfd/training/adam.hpp"
#include "sfd/training/config.hpp"

namespace sfd::training {

struct TrainData {
  std::vector<imaging::ImagePair> pairs;
  std::vector<imaging::SaliencyMask> masks;
  std::vector<std::string> warnings;
};

/// Loads the dataset named by the config: pairs in stem order, capped at
/// max_pairs, with file masks or the Otsu fallback.
TrainData load_training_data(const TrainConfig& config);

struct StepLog {
  std::int64_t step = 0;
  int epoch = 0;
  losses::LossBreakdown loss;  // mean over the batch
  double lr = 0;
};

struct ClipEvent {
  std::int64_t step = 0;
  double norm = 0;
  double factor = 0;
};

struct TrainResult {
  net::FusionNet net;
  AdamState adam;
  std::vector<StepLog> steps;
  /// Mean over every item seen in each epoch.
  std::vector<losses::LossBreakdown> epoch_means;
  std::vector<ClipEvent> clips;
};

/// Output files written under config.out_dir.
struct TrainOutputs {
  static constexpr const char* kLog = "train_log.csv";
  static constexpr const char* kClipLog = "clip_log.csv";
  static constexpr const char* kCheckpoint = "last.sfdf";
  static constexpr const char* kConfig = "config.txt";
};

std::string log_header();
std::string log_line(const StepLog& row);

using ProgressFn = std::function<void(const std::string&)>;

/// Trains from scratch. Each epoch shuffles the pairs, cuts one random
/// aligned crop per pair, and takes an Adam step per batch after clipping the
/// global gradient norm. last.sfdf is replaced at the end of every epoch, so
/// a NumericError mid-run leaves the last good checkpoint in place.
TrainResult train(const TrainConfig& config, const TrainData& data, const ProgressFn& progress = {});
TrainResult train(const TrainConfig& config, const ProgressFn& progress = {});

}  // namespace sfd::training
