#include "sfd/cli/cli.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <CLI11.hpp>
#include <fmt/format.h>

#include "sfd/core/error.hpp"
#include "sfd/imaging/color.hpp"
#include "sfd/imaging/dataset.hpp"
#include "sfd/imaging/pair.hpp"
#include "sfd/imaging/png_io.hpp"
#include "sfd/metrics/metrics.hpp"
#include "sfd/selftest/suites.hpp"
#include "sfd/training/checkpoint.hpp"
#include "sfd/training/trainer.hpp"

namespace sfd::cli {
namespace fs = std::filesystem;
namespace {

struct FuseArgs {
  std::string ckpt, ir, vis, out, mask;
  bool gray = false;
};

struct TrainArgs {
  std::string config, dataset, out_dir, ablation;
  std::vector<std::string> sets;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
};

struct EvalArgs {
  std::string fused_dir, ir_dir, vis_dir, out, label;
};

struct SelftestArgs {
  bool inject_sobel_fault = false;
};

void fuse_one(const net::FusionNet& net, const fs::path& ir, const fs::path& vis, const std::optional<fs::path>& mask,
              const fs::path& out, bool gray) {
  auto pair = imaging::load_pair(ir, vis);
  if (mask) imaging::load_or_generate_mask(pair, mask);  // registration check only
  const Tensor img = gray ? net.forward(pair) : net::fuse_to_rgb(net, pair);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  imaging::write_png(out, imaging::to_image8(img));
}

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  const auto net = training::restore_net(training::load_checkpoint(a.ckpt));
  if (!fs::is_directory(a.ir)) {
    if (fs::is_directory(a.vis)) throw ConfigError("--ir is a file but --vis is a directory");
    fuse_one(net, a.ir, a.vis, a.mask.empty() ? std::nullopt : std::optional<fs::path>(a.mask), a.out, a.gray);
    out << fmt::format("wrote {}\n", a.out);
    return kOk;
  }
  if (!fs::is_directory(a.vis)) throw ConfigError("--ir is a directory but --vis is not");
  auto index = imaging::dataset_index(a.ir, a.vis, a.mask.empty() ? std::nullopt : std::optional<fs::path>(a.mask));
  for (const auto& w : index.warnings) out << "warning: " << w << "\n";
  fs::create_directories(a.out);
  for (const auto& e : index.entries) {
    fuse_one(net, e.ir, e.vis, e.mask, fs::path(a.out) / (e.stem + ".png"), a.gray);
  }
  out << fmt::format("fused {} pairs into {}\n", index.entries.size(), a.out);
  return kOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  training::TrainConfig cfg = a.config.empty() ? training::TrainConfig{} : training::load_config(a.config);
  if (!a.dataset.empty()) cfg.dataset = a.dataset;
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  if (!a.ablation.empty() && a.ablation != "none") {
    static const std::map<std::string, std::string> flags = {
        {"no-dmrm", "use_dmrm"}, {"no-fdfm", "use_fdfm"}, {"no-lfre", "use_lfre"}};
    training::set_field(cfg, flags.at(a.ablation), "false");
  }
  for (const auto& s : a.sets) training::apply_override(cfg, s);
  training::validate(cfg);
  auto data = training::load_training_data(cfg);
  for (const auto& w : data.warnings) out << "warning: " << w << "\n";
  out << fmt::format("training on {} pairs for {} epochs\n", data.pairs.size(), cfg.epochs);
  auto result = training::train(cfg, data, [&](const std::string& s) { out << s << "\n" << std::flush; });
  out << fmt::format("checkpoint {}\nlog {}\n{} of {} steps clipped\n",
                     (cfg.out_dir / training::TrainOutputs::kCheckpoint).string(),
                     (cfg.out_dir / training::TrainOutputs::kLog).string(), result.clips.size(), result.steps.size());
  return kOk;
}

Tensor luma_of(const Tensor& t) { return t.dim(0) == 3 ? imaging::rgb_to_ycbcr(t).y : t; }

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  auto index = imaging::dataset_index(a.ir_dir, a.vis_dir);
  for (const auto& w : index.warnings) out << "warning: " << w << "\n";
  metrics::MetricsReport report;
  report.dataset = a.label.empty() ? fs::path(a.fused_dir).filename().string() : a.label;
  for (const auto& e : index.entries) {
    const auto fused_path = fs::path(a.fused_dir) / (e.stem + ".png");
    if (!fs::exists(fused_path)) {
      out << fmt::format("warning: {}: no fused image, skipped\n", e.stem);
      continue;
    }
    const auto pair = imaging::load_pair(e.ir, e.vis);
    const Tensor fused = luma_of(imaging::to_tensor(imaging::read_png(fused_path)));
    if (fused.dim(1) != pair.height() || fused.dim(2) != pair.width()) {
      throw RegistrationError(fmt::format("{}: fused image is {}x{}, sources are {}x{}", e.stem, fused.dim(2),
                                          fused.dim(1), pair.width(), pair.height()));
    }
    report.rows.push_back(metrics::evaluate(e.stem, fused, pair.ir, pair.vis_y));
  }
  if (report.rows.empty()) throw DatasetError(fmt::format("no fused images in {} match the sources", a.fused_dir));
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  metrics::write_csv(a.out, report);
  const auto m = report.mean();
  out << fmt::format("{} images  EN {:.4f}  SD {:.4f}  SF {:.4f}  MI {:.4f}  VIF {:.4f}  Qabf {:.4f}\n",
                     report.rows.size(), m.en, m.sd, m.sf, m.mi, m.vif, m.qabf);
  out << fmt::format("report {}\n", a.out);
  return kOk;
}

int cmd_selftest(const SelftestArgs& a, std::ostream& out) {
  const auto results = selftest::run_all({.inject_sobel_fault = a.inject_sobel_fault});
  out << selftest::format_table(results);
  for (const auto& r : results)
    if (!r.pass) return kNumeric;
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infrared/visible image fusion"};
  app.require_subcommand(1);

  FuseArgs fa;
  auto* fuse = app.add_subcommand("fuse", "Fuse an infrared/visible pair, or two directories paired by file stem");
  fuse->add_option("--ckpt", fa.ckpt, "Checkpoint file")->required();
  fuse->add_option("--ir", fa.ir, "Infrared PNG or directory")->required();
  fuse->add_option("--vis", fa.vis, "Visible PNG or directory")->required();
  fuse->add_option("--out", fa.out, "Output PNG, or directory in batch mode")->required();
  fuse->add_option("--mask", fa.mask, "Saliency mask PNG or directory (registration is checked)");
  fuse->add_flag("--gray", fa.gray, "Write the fused luma instead of RGB");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train a fusion network");
  tr->add_option("--config", ta.config, "Flat key = value config file");
  tr->add_option("--dataset", ta.dataset, "Dataset root with ir/, vis/ and optional mask/");
  tr->add_option("--out-dir", ta.out_dir, "Directory for checkpoint and logs");
  tr->add_option("--epochs", ta.epochs, "Epoch count");
  tr->add_option("--seed", ta.seed, "Random seed");
  tr->add_option("--ablation", ta.ablation, "Disable one component")
      ->check(CLI::IsMember({"none", "no-dmrm", "no-fdfm", "no-lfre"}));
  tr->add_option("--set", ta.sets, "Override any config field, key=value (repeatable)");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Compute EN, SD, SF, MI, VIF and Qabf for fused images");
  ev->add_option("--fused-dir", ea.fused_dir, "Fused PNGs named by stem")->required();
  ev->add_option("--ir-dir", ea.ir_dir, "Infrared PNGs")->required();
  ev->add_option("--vis-dir", ea.vis_dir, "Visible PNGs")->required();
  ev->add_option("--out", ea.out, "Report CSV")->required();
  ev->add_option("--label", ea.label, "Dataset label");

  SelftestArgs sa;
  auto* st = app.add_subcommand("selftest", "Run FFT, convolution, gradient and metric self-checks");
  st->add_flag("--inject-sobel-fault", sa.inject_sobel_fault, "Corrupt the Sobel backward pass (should fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  try {
    if (*fuse) return cmd_fuse(fa, out);
    if (*tr) return cmd_train(ta, out);
    if (*ev) return cmd_eval(ea, out);
    return cmd_selftest(sa, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const RegistrationError& e) {
    err << "registration error: " << e.what() << "\n";
    return kIo;
  } catch (const DatasetError& e) {
    err << "dataset error: " << e.what() << "\n";
    return kIo;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  }
}

}  // namespace sfd::cli
