#include "doctest.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <fmt/format.h>

#include "sfd/core/error.hpp"
#include "sfd/core/ops.hpp"
#include "sfd/imaging/synthetic.hpp"
#include "sfd/training/checkpoint.hpp"
#include "sfd/training/trainer.hpp"
#include "test_util.hpp"

using namespace sfd;
using namespace sfd::training;

namespace {

net::ParamSet one_param(Real x) {
  net::ParamSet ps;
  ps.add("x", Tensor::parameter({1}, {x}));
  return ps;
}

void set_grad(const Tensor& p, std::vector<Real> g) { p.impl()->grad = std::move(g); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> bytes_of(const std::filesystem::path& p) {
  auto s = slurp(p);
  return {s.begin(), s.end()};
}

TrainConfig tiny_config(const std::filesystem::path& root, const std::string& run) {
  TrainConfig c;
  c.dataset = root;
  c.out_dir = root / run;
  c.epochs = 2;
  c.batch_size = 2;
  c.crop = 24;
  c.seed = 3;
  c.net.d = 4;
  c.net.c = 2;
  return c;
}

}  // namespace

TEST_CASE("Adam minimizes a quadratic like the scalar reference") {
  auto ps = one_param(1.0f);
  AdamConfig cfg;
  cfg.lr = 0.1;
  auto st = make_adam_state(ps);
  // scalar reference in double
  double x = 1, m = 0, v = 0;
  for (int t = 1; t <= 100; ++t) {
    set_grad(ps.get("x"), {static_cast<Real>(2 * ps.get("x").data()[0])});
    adam_step(ps, st, cfg);
    const double g = 2 * x;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  const double got = ps.get("x").data()[0];
  CHECK(std::abs(got) < 0.05);
  CHECK(std::abs(got - x) < 1e-4);
  CHECK(st.step == 100);
}

TEST_CASE("Adam first step and zero gradients") {
  auto ps = one_param(0.5f);
  auto st = make_adam_state(ps);
  set_grad(ps.get("x"), {-3.0f});
  adam_step(ps, st, {});
  CHECK(ps.get("x").data()[0] - 0.5 == doctest::Approx(5e-4).epsilon(1e-4));

  auto fresh = one_param(0.5f);
  auto s0 = make_adam_state(fresh);
  set_grad(fresh.get("x"), {0.0f});
  adam_step(fresh, s0, {});
  CHECK(fresh.get("x").data()[0] == 0.5f);
  CHECK(s0.m[0][0] == 0.0f);

  const Real m_before = st.m[0][0], v_before = st.v[0][0];
  ps.zero_grad();
  adam_step(ps, st, {});
  CHECK(st.m[0][0] == doctest::Approx(0.9 * m_before));
  CHECK(st.v[0][0] == doctest::Approx(0.999 * v_before));
  CHECK(std::abs(st.m[0][0]) < std::abs(m_before));
}

TEST_CASE("Adam rejects non-finite gradients without touching state") {
  net::ParamSet ps;
  ps.add("a", Tensor::parameter({2}, {1.0f, 2.0f}));
  ps.add("b", Tensor::parameter({1}, {3.0f}));
  auto st = make_adam_state(ps);
  set_grad(ps.get("a"), {0.1f, 0.2f});
  set_grad(ps.get("b"), {std::nanf("")});
  CHECK_THROWS_WITH_AS(adam_step(ps, st, {}), doctest::Contains("b"), NumericError);
  CHECK(st.step == 0);
  CHECK(ps.get("a").data()[0] == 1.0f);
  CHECK(st.m[0][0] == 0.0f);
}

TEST_CASE("gradient norm and scaling") {
  net::ParamSet ps;
  ps.add("a", Tensor::parameter({2}, {0, 0}));
  ps.add("b", Tensor::parameter({1}, {0}));
  set_grad(ps.get("a"), {3.0f, 0.0f});
  set_grad(ps.get("b"), {4.0f});
  CHECK(grad_norm(ps) == doctest::Approx(5.0));
  scale_grads(ps, 0.2);
  CHECK(grad_norm(ps) == doctest::Approx(1.0));
}

TEST_CASE("config parsing, overrides and validation") {
  auto c = parse_config("# comment\nepochs = 7\n  lr=0.001  # trailing\nuse_fdfm = false\ndataset = data/x\n", "/base");
  CHECK(c.epochs == 7);
  CHECK(c.adam.lr == 0.001);
  CHECK_FALSE(c.net.ablation.use_fdfm);
  CHECK(c.dataset == std::filesystem::path("/base/data/x"));
  CHECK(c.batch_size == 4);
  CHECK(c.crop == 128);
  CHECK(c.weights.lambda_s == 10);

  apply_override(c, "batch_size=2");
  apply_override(c, "fre_literal_sign=true");
  CHECK(c.batch_size == 2);
  CHECK(loss_options(c).fre_sign == losses::FreSign::Literal);

  auto again = parse_config(to_text(c));
  CHECK(to_text(again) == to_text(c));

  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs = x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "use_dmrm=maybe"), ConfigError);
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = {};
  bad.net.ablation.use_dmrm = bad.net.ablation.use_fdfm = false;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = {};
  bad.lr_schedule = "cosine";
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.txt"), IoError);
}

TEST_CASE("checkpoint save, load, save is byte-identical") {
  auto dir = test::scratch_dir("ckpt");
  Rng rng(21);
  for (int k = 0; k < 5; ++k) {
    net::NetConfig nc;
    nc.d = 2 * static_cast<int>(1 + rng.below(4));
    nc.c = static_cast<int>(1 + rng.below(4));
    nc.ablation.use_dmrm = k != 1;
    nc.ablation.use_fdfm = k != 2;
    auto net = net::FusionNet::create(nc, rng.next_u64());
    auto adam = make_adam_state(net.params);
    for (auto& m : adam.m)
      for (auto& x : m) x = static_cast<Real>(rng.uniform(-1, 1));
    for (auto& v : adam.v)
      for (auto& x : v) x = static_cast<Real>(rng.uniform(0, 1));
    adam.step = k * 10;
    auto ck = make_checkpoint(net, k % 2 ? nullptr : &adam);
    ck.epoch = k;
    ck.step = 3 * k;
    ck.train_config = {{"seed", std::to_string(k)}, {"lr", "0.0005"}};
    const auto a = dir / fmt::format("a{}.sfdf", k), b = dir / fmt::format("b{}.sfdf", k);
    save_checkpoint(a, ck);
    auto loaded = load_checkpoint(a);
    save_checkpoint(b, loaded);
    CHECK(bytes_of(a) == bytes_of(b));

    REQUIRE(loaded.params.size() == ck.params.size());
    for (std::size_t i = 0; i < ck.params.size(); ++i) CHECK(loaded.params[i].values == ck.params[i].values);
    CHECK(loaded.adam.has_value() == (k % 2 == 0));
    CHECK(loaded.train_config == ck.train_config);
    auto restored = restore_net(loaded);
    Tensor ir = test::random_tensor(rng, {1, 12, 12}), vis = test::random_tensor(rng, {1, 12, 12});
    auto f0 = net.forward(ir, vis), f1 = restored.forward(ir, vis);
    CHECK(std::equal(f0.data().begin(), f0.data().end(), f1.data().begin()));
  }
}

TEST_CASE("checkpoint load errors") {
  auto dir = test::scratch_dir("ckpt_err");
  net::NetConfig narrow;
  narrow.d = 16;
  narrow.c = 4;
  auto net = net::FusionNet::create(narrow, 1);
  auto bytes = encode(make_checkpoint(net));

  auto cut = bytes;
  cut.resize(bytes.size() - 100);
  CHECK_THROWS_WITH_AS(decode(cut), doctest::Contains("missing bytes"), CheckpointError);
  cut.resize(10);
  CHECK_THROWS_WITH_AS(decode(cut), doctest::Contains("missing bytes"), CheckpointError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_WITH_AS(decode(magic), doctest::Contains("magic"), CheckpointError);
  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_WITH_AS(decode(version), doctest::Contains("version"), CheckpointError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode(trailing), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.sfdf"), CheckpointError);

  auto wide_cfg = narrow;
  wide_cfg.d = 32;
  auto wide = net::FusionNet::create(wide_cfg, 1);
  CHECK_THROWS_WITH_AS(load_weights(wide, decode(bytes)), doctest::Contains("head.conv1.weight"), CheckpointError);
  auto off_cfg = narrow;
  off_cfg.ablation.use_fdfm = false;
  auto no_fdfm = net::FusionNet::create(off_cfg, 1);
  CHECK_THROWS_WITH_AS(load_weights(no_fdfm, decode(bytes)), doctest::Contains("not in network"), CheckpointError);
}

TEST_CASE("tiny training run is deterministic and honours the ablation") {
  auto root = test::scratch_dir("train");
  imaging::write_synthetic_dataset(root, 3, 32, 30, 5);
  auto cfg = tiny_config(root, "a");
  auto r1 = train(cfg);
  auto r2 = train(tiny_config(root, "b"));
  CHECK(r1.steps.size() == 4);  // ceil(3 / 2) per epoch
  CHECK(r1.epoch_means.size() == 2);
  const auto log_a = slurp(root / "a" / TrainOutputs::kLog);
  CHECK(log_a.rfind(log_header(), 0) == 0);
  CHECK(log_a == slurp(root / "b" / TrainOutputs::kLog));
  CHECK(slurp(root / "a" / TrainOutputs::kClipLog) == slurp(root / "b" / TrainOutputs::kClipLog));
  {
    // the config snapshots differ only in out_dir
    auto ca = load_checkpoint(root / "a" / TrainOutputs::kCheckpoint);
    auto cb = load_checkpoint(root / "b" / TrainOutputs::kCheckpoint);
    REQUIRE(ca.params.size() == cb.params.size());
    for (std::size_t i = 0; i < ca.params.size(); ++i) CHECK(ca.params[i].values == cb.params[i].values);
    CHECK(ca.adam->m == cb.adam->m);
    CHECK(ca.adam->v == cb.adam->v);
  }

  auto ck = load_checkpoint(root / "a" / TrainOutputs::kCheckpoint);
  CHECK(ck.epoch == 2);
  CHECK(ck.step == 4);
  REQUIRE(ck.adam.has_value());
  CHECK(ck.adam->step == 4);
  auto restored = restore_net(ck);
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const auto d = r1.net.params.items()[i].value.data();
    CHECK(std::equal(d.begin(), d.end(), ck.params[i].values.begin()));
  }
  (void)restored;

  auto off = tiny_config(root, "nofdfm");
  off.net.ablation.use_fdfm = false;
  auto r3 = train(off);
  for (const auto& s : r3.steps) CHECK(s.loss.l_fre == 0.0);
  std::istringstream lines(slurp(root / "nofdfm" / TrainOutputs::kLog));
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 8);
    CHECK(cols[5] == "0");
  }
}

TEST_CASE("training rejects bad setups and keeps the last good checkpoint") {
  auto root = test::scratch_dir("train_err");
  imaging::write_synthetic_dataset(root, 2, 20, 20, 6);
  auto cfg = tiny_config(root, "big");
  cfg.crop = 32;
  CHECK_THROWS_AS(train(cfg), ConfigError);
  auto none = tiny_config(root / "nowhere", "x");
  CHECK_THROWS_AS(train(none), DatasetError);

  auto blow = tiny_config(root, "nan");
  blow.crop = 16;
  blow.batch_size = 2;
  blow.epochs = 5;
  blow.clip_norm = 0;
  blow.adam.lr = 1e30;
  CHECK_THROWS_WITH_AS(train(blow), doctest::Contains("last good checkpoint"), NumericError);
  auto ck = load_checkpoint(root / "nan" / TrainOutputs::kCheckpoint);
  CHECK(ck.epoch >= 1);
}
