#include "sfd/training/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <fmt/format.h>

#include "sfd/core/autograd.hpp"
#include "sfd/core/error.hpp"
#include "sfd/core/ops.hpp"
#include "sfd/core/rng.hpp"
#include "sfd/imaging/dataset.hpp"
#include "sfd/training/checkpoint.hpp"

namespace sfd::training {
namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write {}", p.string()));
  return f;
}

}  // namespace

TrainData load_training_data(const TrainConfig& config) {
  if (config.dataset.empty()) throw ConfigError("dataset is not set");
  auto index = imaging::dataset_index(config.dataset);
  TrainData data;
  data.warnings = index.warnings;
  std::size_t n = index.entries.size();
  if (config.max_pairs > 0) n = std::min(n, static_cast<std::size_t>(config.max_pairs));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = index.entries[i];
    auto pair = imaging::load_pair(e.ir, e.vis);
    pair.id = e.stem;
    data.masks.push_back(imaging::load_or_generate_mask(pair, e.mask));
    data.pairs.push_back(std::move(pair));
  }
  return data;
}

std::string log_header() { return "step,l_int,l_grad,l_ssim,l_saliency,l_fre,l_total,lr\n"; }

std::string log_line(const StepLog& r) {
  return fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{}\n", r.step, r.loss.l_int, r.loss.l_grad,
                     r.loss.l_ssim, r.loss.l_saliency, r.loss.l_fre, r.loss.l_total, r.lr);
}

TrainResult train(const TrainConfig& config, const ProgressFn& progress) {
  return train(config, load_training_data(config), progress);
}

TrainResult train(const TrainConfig& config, const TrainData& data, const ProgressFn& progress) {
  validate(config);
  if (data.pairs.empty()) throw DatasetError("no training pairs");
  for (const auto& p : data.pairs) {
    if (p.height() < config.crop || p.width() < config.crop) {
      throw ConfigError(fmt::format("crop {} exceeds pair {} ({}x{})", config.crop, p.id, p.width(), p.height()));
    }
  }
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };

  std::filesystem::create_directories(config.out_dir);
  const auto ckpt_path = config.out_dir / TrainOutputs::kCheckpoint;
  open_out(config.out_dir / TrainOutputs::kConfig) << to_text(config);
  auto log = open_out(config.out_dir / TrainOutputs::kLog);
  auto clip_log = open_out(config.out_dir / TrainOutputs::kClipLog);
  log << log_header();
  clip_log << "step,grad_norm,scale\n";

  // Separate streams keep the weight init independent of the data order.
  Rng rng(config.seed);
  TrainResult result{net::FusionNet::create(config.net, config.seed), {}, {}, {}, {}};
  auto& net = result.net;
  result.adam = make_adam_state(net.params);
  const auto opts = loss_options(config);
  const auto snapshot = to_pairs(config);

  std::vector<std::size_t> order(data.pairs.size());
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<losses::LossBreakdown> seen;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto inv_n = static_cast<Real>(1.0 / static_cast<double>(stop - start));
      net.params.zero_grad();
      std::vector<losses::LossBreakdown> batch;
      ++step;
      try {
        for (std::size_t k = start; k < stop; ++k) {
          const auto& pair = data.pairs[order[k]];
          const auto top = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pair.height() - config.crop + 1)));
          const auto left = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pair.width() - config.crop + 1)));
          const auto crop = imaging::crop_pair(pair, top, left, config.crop);
          const auto mask = imaging::crop_mask(data.masks[order[k]], top, left, config.crop);
          GradTape tape;
          TapeScope scope(tape);
          const auto out = net.run(crop.ir, crop.vis_y);
          const auto terms = losses::total_loss(out, crop.ir, crop.vis_y, mask.m, opts);
          tape.backward(ops::scale(terms.total, inv_n));
          batch.push_back(terms.breakdown);
        }
        if (config.clip_norm > 0) {
          const double norm = grad_norm(net.params);
          if (norm > config.clip_norm) {
            const double factor = config.clip_norm / norm;
            scale_grads(net.params, factor);
            result.clips.push_back({step, norm, factor});
            clip_log << fmt::format("{},{:.9g},{:.9g}\n", step, norm, factor) << std::flush;
          }
        }
        adam_step(net.params, result.adam, config.adam);
      } catch (const NumericError& e) {
        throw NumericError(fmt::format("training halted at epoch {} step {}: {}{}", epoch, step, e.what(),
                                       epoch > 1 ? fmt::format(" (last good checkpoint: {})", ckpt_path.string())
                                                 : std::string()));
      }
      StepLog row{step, epoch, losses::mean_breakdown(batch), config.adam.lr};
      log << log_line(row) << std::flush;
      result.steps.push_back(row);
      seen.insert(seen.end(), batch.begin(), batch.end());
    }
    net.params.zero_grad();
    result.epoch_means.push_back(losses::mean_breakdown(seen));

    auto ck = make_checkpoint(net, &result.adam);
    ck.train_config = snapshot;
    ck.epoch = epoch;
    ck.step = step;
    save_checkpoint(ckpt_path, ck);
    if (config.keep_epoch_checkpoints) {
      save_checkpoint(config.out_dir / fmt::format("epoch_{:03d}.sfdf", epoch), ck);
    }
    say(fmt::format("epoch {}/{}  l_total {:.5f}", epoch, config.epochs, result.epoch_means.back().l_total));
  }
  return result;
}

}  // namespace sfd::training
