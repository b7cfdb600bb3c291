// Acceptance runner: one PASS/FAIL line per criterion, 1 through 10.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <CLI11.hpp>
#include <fmt/format.h>

#include "sfd/cli/cli.hpp"
#include "sfd/core/rng.hpp"
#include "sfd/imaging/dataset.hpp"
#include "sfd/imaging/synthetic.hpp"
#include "sfd/losses/losses.hpp"
#include "sfd/metrics/metrics.hpp"
#include "sfd/selftest/suites.hpp"
#include "sfd/training/checkpoint.hpp"
#include "sfd/training/trainer.hpp"

using namespace sfd;
namespace fs = std::filesystem;

namespace {

// Thresholds, pinned.
constexpr double kFftRuntime = 5.0;            // s
constexpr double kGradRuntime = 120.0;         // s
constexpr double kIdentityTol = 1e-6;
constexpr double kMetricTol = 1e-6;
constexpr double kQabfSelfMin = 0.98;
constexpr double kDescentRatio = 0.7;
constexpr double kTrainRuntime = 600.0;        // s per run
constexpr double kParamTarget = 0.14e6;
constexpr double kParamFactor = 2.0;
constexpr int kRoundtrips = 5;
constexpr double kEvalPerImage = 1.0;          // s
constexpr int kEvalImages = 3;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
  int id;
  bool pass;
  std::string text;
};

std::vector<Line> g_lines;

void report(int id, bool pass, const std::string& text) {
  g_lines.push_back({id, pass, text});
  std::cout << fmt::format("criterion {:>2}  {}  {}", id, pass ? "PASS" : "FAIL", text) << std::endl;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void criterion_fft() {
  const auto r = selftest::check_fft();
  report(1, r.pass && r.seconds < kFftRuntime, fmt::format("FFT: {} ({:.2f} s)", r.detail, r.seconds));
}

void criterion_gradients(const std::string& helper) {
  const auto t0 = Clock::now();
  std::string line;
  int status = -1;
  if (FILE* p = popen(helper.c_str(), "r")) {
    std::array<char, 512> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) line += buf.data();
    status = pclose(p);
  }
  while (!line.empty() && line.back() == '\n') line.pop_back();
  const double secs = since(t0);
  report(2, status == 0 && secs < kGradRuntime,
         fmt::format("gradients (f64 build): {} [wall {:.1f} s]", line.empty() ? "helper did not run" : line, secs));
}

void criterion_identities() {
  Rng rng(31);
  losses::LossOptions opt;  // weights (10, 5, 10, 5)
  const auto& w = opt.weights;
  const bool weights_ok = w.lambda_s == 10 && w.alpha_1 == 5 && w.alpha_2 == 10 && w.beta == 5;
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    auto plane = [&](double lo, double hi) {
      std::vector<Real> v(24 * 24);
      for (auto& x : v) x = static_cast<Real>(rng.uniform(lo, hi));
      return Tensor({1, 24, 24}, v);
    };
    auto f = plane(0, 1), freq = plane(-1, 1), ir = plane(0, 1), vis = plane(0, 1);
    std::vector<Real> m(24 * 24);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform() < 0.3 ? 1 : 0;
    Tensor mask({1, 24, 24}, m);
    const auto terms = losses::total_loss(f, freq, ir, vis, mask, opt);
    const auto& b = terms.breakdown;
    // components recomputed one by one
    const double li = losses::loss_int(f, ir, vis).item(), lg = losses::loss_grad(f, ir, vis).item();
    const double ls = losses::loss_ssim(f, ir, vis).item();
    const double lsal = losses::loss_saliency(f, ir, vis, mask, w.beta).item();
    const double lf = losses::loss_fre(freq, ir, vis, mask).value.item();
    const double content = w.alpha_1 * li + w.alpha_2 * lg;
    const double total = content + ls + w.lambda_s * lsal + lf;
    for (double d : {b.l_int - li, b.l_grad - lg, b.l_ssim - ls, b.l_saliency - lsal, b.l_fre - lf,
                     (b.l_content - content) / std::max(1.0, content), (b.l_total - total) / std::max(1.0, total),
                     (terms.total.item() - total) / std::max(1.0, total)})
      worst = std::max(worst, std::abs(d));
  }
  report(3, weights_ok && worst < kIdentityTol,
         fmt::format("loss identities with weights ({}, {}, {}, {}): worst deviation {:.2e} over 10 items",
                     w.lambda_s, w.alpha_1, w.alpha_2, w.beta, worst));
}

void criterion_metrics() {
  using metrics::Plane;
  auto near = [](double a, double b) { return std::abs(a - b) <= kMetricTol; };
  Plane flat{16, 16, std::vector<double>(256, 100)};
  Plane two{16, 16, std::vector<double>(256, 0)};
  for (int i = 0; i < 128; ++i) two.v[i] = 255;
  Plane stripes{16, 16, {}};
  for (int i = 0; i < 256; ++i) stripes.v.push_back(i % 2 ? 255 : 0);
  Plane x{48, 48, {}};
  Rng rng(41);
  for (int i = 0; i < 48; ++i)
    for (int j = 0; j < 48; ++j)
      x.v.push_back(std::round(std::clamp(128 + 80 * std::sin(0.2 * j) * std::cos(0.15 * i) + rng.uniform(-25, 25), 0.0, 255.0)));
  const bool analytic = near(metrics::entropy(flat), 0) && near(metrics::standard_deviation(flat), 0) &&
                        near(metrics::spatial_frequency(flat), 0) && near(metrics::entropy(two), 1.0) &&
                        near(metrics::standard_deviation(two), 127.5) && near(metrics::spatial_frequency(stripes), 255) &&
                        near(metrics::mi(x, x, x), 2 * metrics::entropy(x));
  const double vif_self = metrics::vif_single(x, x);
  const double q_self = metrics::qabf(x, x, x);
  const bool pass = analytic && near(vif_self, 1.0) && q_self > kQabfSelfMin;
  report(4, pass,
         fmt::format("metrics: EN/SD/SF/MI analytic cases {}; VIF self {:.9f}; Qabf self {:.6f} (needs > {}, "
                     "sigmoid ceiling {:.6f})",
                     analytic ? "exact" : "MISMATCH", vif_self, q_self, kQabfSelfMin, metrics::qabf_ceiling()));
}

training::TrainConfig base_config(const fs::path& data, const fs::path& out) {
  training::TrainConfig c;
  c.dataset = data / "train";
  c.out_dir = out;
  c.epochs = 20;
  c.seed = 0;
  return c;
}

struct Trained {
  training::TrainResult result;
  double seconds = 0;
};

Trained run_training(const training::TrainConfig& cfg) {
  const auto t0 = Clock::now();
  auto r = training::train(cfg);
  return {std::move(r), since(t0)};
}

// Fused luma of every pair under `split`, round-tripped through 8 bits as
// cmd_fuse would write it.
struct SplitScores {
  double mi = 0, vif = 0;
};

SplitScores score_split(const net::FusionNet& net, const fs::path& split) {
  auto index = imaging::dataset_index(split);
  SplitScores s;
  for (const auto& e : index.entries) {
    const auto pair = imaging::load_pair(e.ir, e.vis);
    const auto fused = imaging::to_tensor(imaging::to_image8(net.forward(pair)));
    const auto row = metrics::evaluate(e.stem, fused, pair.ir, pair.vis_y);
    s.mi += row.mi;
    s.vif += row.vif;
  }
  s.mi /= static_cast<double>(index.entries.size());
  s.vif /= static_cast<double>(index.entries.size());
  return s;
}

void criterion_hot_targets(const net::FusionNet& net, const fs::path& data) {
  double worst_margin = 1e9;
  int images = 0;
  for (const char* split : {"train", "test"}) {
    for (const auto& e : imaging::dataset_index(data / split).entries) {
      const auto pair = imaging::load_pair(e.ir, e.vis);
      const auto mask = imaging::load_or_generate_mask(pair, e.mask);
      const auto fused = net.forward(pair);
      const auto h = pair.height(), w = pair.width();
      const auto m = mask.m.data();
      double sf = 0, sv = 0;
      std::int64_t n = 0;
      for (std::int64_t i = 1; i + 1 < h; ++i)
        for (std::int64_t j = 1; j + 1 < w; ++j) {
          bool interior = true;
          for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) interior = interior && m[(i + di) * w + j + dj] > 0.5f;
          if (!interior) continue;
          sf += fused.data()[i * w + j];
          sv += pair.vis_y.data()[i * w + j];
          ++n;
        }
      if (n == 0) continue;
      worst_margin = std::min(worst_margin, (sf - sv) / static_cast<double>(n));
      ++images;
    }
  }
  report(8, images > 0 && worst_margin >= 0,
         fmt::format("hot targets: fused minus visible luma inside masks, worst image {:+.4f} over {} images",
                     worst_margin, images));
}

void criterion_roundtrip(const fs::path& work) {
  Rng rng(51);
  int identical = 0;
  for (int k = 0; k < kRoundtrips; ++k) {
    net::NetConfig nc;
    nc.d = 2 * static_cast<int>(2 + rng.below(15));
    nc.c = static_cast<int>(1 + rng.below(16));
    auto net = net::FusionNet::create(nc, rng.next_u64());
    auto adam = training::make_adam_state(net.params);
    for (auto& m : adam.m)
      for (auto& x : m) x = static_cast<Real>(rng.normal() * 1e-3);
    for (auto& v : adam.v)
      for (auto& x : v) x = static_cast<Real>(rng.uniform() * 1e-6);
    adam.step = static_cast<std::int64_t>(rng.below(1000));
    auto ck = training::make_checkpoint(net, &adam);
    ck.epoch = k;
    ck.step = adam.step;
    const auto a = work / fmt::format("rt{}_a.sfdf", k), b = work / fmt::format("rt{}_b.sfdf", k);
    training::save_checkpoint(a, ck);
    training::save_checkpoint(b, training::load_checkpoint(a));
    identical += slurp(a) == slurp(b) ? 1 : 0;
  }
  report(9, identical == kRoundtrips,
         fmt::format("checkpoint save/load/save byte-identical for {}/{} random checkpoints", identical, kRoundtrips));
}

void criterion_eval_speed(const fs::path& work, const fs::path& ckpt) {
  const auto root = work / "large";
  fs::remove_all(root);
  imaging::write_synthetic_dataset(root, kEvalImages, 480, 640, 77);
  auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "sfd");
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::pair{code, err.str()};
  };
  auto [fuse_code, fuse_err] = run({"fuse", "--ckpt", ckpt.string(), "--ir", (root / "ir").string(), "--vis",
                                    (root / "vis").string(), "--out", (root / "fused").string(), "--gray"});
  if (fuse_code != 0) {
    report(10, false, fmt::format("eval at 640x480: fuse failed: {}", fuse_err));
    return;
  }
  const auto t0 = Clock::now();
  auto [code, err] = run({"eval", "--fused-dir", (root / "fused").string(), "--ir-dir", (root / "ir").string(),
                          "--vis-dir", (root / "vis").string(), "--out", (root / "report.csv").string()});
  const double per = since(t0) / kEvalImages;
  std::size_t rows = 0, cols = 0;
  {
    std::istringstream in(slurp(root / "report.csv"));
    for (std::string l; std::getline(in, l); ++rows) cols = static_cast<std::size_t>(std::count(l.begin(), l.end(), ',')) + 1;
  }
  const bool complete = code == 0 && rows == kEvalImages + 2 && cols == 7;
  report(10, complete && per < kEvalPerImage,
         fmt::format("eval at 640x480: {:.3f} s per image over {} images, six metrics {}", per, kEvalImages,
                     complete ? "written" : fmt::format("missing (exit {}: {})", code, err)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks, criteria 1-10"};
  std::string data = SFD_DATA_DIR, work = "acceptance_work", helper = SFD_GRAD_HELPER;
  app.add_option("--data", data, "Synthetic dataset root with train/ and test/");
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--grad-helper", helper, "Double-precision gradient check executable");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);
  const fs::path wd = work, dd = data;

  try {
    criterion_fft();
    criterion_gradients(helper);
    criterion_identities();
    criterion_metrics();

    // 5: descent and determinism
    auto cfg_a = base_config(dd, wd / "full_a");
    auto cfg_b = base_config(dd, wd / "full_b");
    auto full = run_training(cfg_a);
    auto again = run_training(cfg_b);
    const double first = full.result.epoch_means.front().l_total, last = full.result.epoch_means.back().l_total;
    const bool same_log = slurp(wd / "full_a" / training::TrainOutputs::kLog) ==
                          slurp(wd / "full_b" / training::TrainOutputs::kLog);
    bool same_weights = true;
    const auto& pa = full.result.net.params.items();
    const auto& pb = again.result.net.params.items();
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const auto x = pa[i].value.data(), y = pb[i].value.data();
      same_weights = same_weights && std::equal(x.begin(), x.end(), y.begin(), y.end());
    }
    report(5, last < kDescentRatio * first && same_log && same_weights && full.seconds < kTrainRuntime,
           fmt::format("training: epoch-1 l_total {:.4f} -> epoch-20 {:.4f} (ratio {:.3f}, needs < {}); repeat run "
                       "log {}, weights {}; {:.0f} s and {:.0f} s",
                       first, last, last / first, kDescentRatio, same_log ? "identical" : "DIFFERS",
                       same_weights ? "identical" : "DIFFER", full.seconds, again.seconds));

    // 6: ablation direction on the test split
    auto no_dmrm_cfg = base_config(dd, wd / "no_dmrm");
    no_dmrm_cfg.net.ablation.use_dmrm = false;
    auto no_fdfm_cfg = base_config(dd, wd / "no_fdfm");
    no_fdfm_cfg.net.ablation.use_fdfm = false;
    auto no_dmrm = run_training(no_dmrm_cfg);
    auto no_fdfm = run_training(no_fdfm_cfg);
    const auto s_full = score_split(full.result.net, dd / "test");
    const auto s_nd = score_split(no_dmrm.result.net, dd / "test");
    const auto s_nf = score_split(no_fdfm.result.net, dd / "test");
    const bool order = s_full.mi > s_nd.mi && s_full.mi > s_nf.mi && s_full.vif > s_nd.vif && s_full.vif > s_nf.vif;
    report(6, order,
           fmt::format("ablation on test split (MI / VIF): full {:.4f} / {:.4f}, w/o DMRM {:.4f} / {:.4f}, "
                       "w/o FDFM {:.4f} / {:.4f}",
                       s_full.mi, s_full.vif, s_nd.mi, s_nd.vif, s_nf.mi, s_nf.vif));

    // 7: parameter budget
    const auto count = net::param_count(net::FusionNet::create({}, 0));
    const double ratio = static_cast<double>(count) / kParamTarget;
    report(7, ratio <= kParamFactor && ratio >= 1 / kParamFactor,
           fmt::format("parameters at d=32, c=16: {} ({:.2f}x of 0.14 M, allowed factor {})", count, ratio,
                       kParamFactor));

    criterion_hot_targets(full.result.net, dd);
    criterion_roundtrip(wd);
    criterion_eval_speed(wd, wd / "full_a" / training::TrainOutputs::kCheckpoint);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }

  int passed = 0;
  for (const auto& l : g_lines) passed += l.pass ? 1 : 0;
  std::cout << fmt::format("{}/{} criteria passed", passed, g_lines.size()) << std::endl;
  return passed == static_cast<int>(g_lines.size()) ? 0 : 1;
}
