#include "sfd/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "sfd/core/error.hpp"

namespace sfd::training {
namespace {

using Json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<std::uint8_t>& in, std::size_t at) {
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  return v;
}

Json net_json(const net::NetConfig& c) {
  return Json{{"d", c.d},
              {"c", c.c},
              {"log_amplitude", c.log_amplitude},
              {"use_dmrm", c.ablation.use_dmrm},
              {"use_fdfm", c.ablation.use_fdfm},
              {"use_lfre", c.ablation.use_lfre}};
}

net::NetConfig net_from_json(const Json& j) {
  net::NetConfig c;
  c.d = j.at("d").get<int>();
  c.c = j.at("c").get<int>();
  c.log_amplitude = j.at("log_amplitude").get<bool>();
  c.ablation.use_dmrm = j.at("use_dmrm").get<bool>();
  c.ablation.use_fdfm = j.at("use_fdfm").get<bool>();
  c.ablation.use_lfre = j.at("use_lfre").get<bool>();
  return c;
}

std::size_t numel(const Shape& s) { return static_cast<std::size_t>(shape_numel(s)); }

}  // namespace

Checkpoint make_checkpoint(const net::FusionNet& net, const AdamState* adam) {
  Checkpoint ck;
  ck.net = net.config;
  for (const auto& p : net.params.items()) {
    const auto d = p.value.data();
    ck.params.push_back({p.name, p.value.shape(), std::vector<float>(d.begin(), d.end())});
  }
  if (adam) ck.adam = *adam;
  return ck;
}

std::vector<std::uint8_t> encode(const Checkpoint& ck) {
  struct Block {
    std::string name;
    const Shape* shape;
    std::string role;
    const float* data;
    std::size_t n;
  };
  std::vector<Block> blocks;
  for (const auto& t : ck.params) {
    if (t.values.size() != numel(t.shape)) throw CheckpointError(fmt::format("tensor {}: size does not match shape", t.name));
    blocks.push_back({t.name, &t.shape, "param", t.values.data(), t.values.size()});
  }
  std::vector<std::vector<float>> moments;  // f32 copies of Adam buffers
  if (ck.adam) {
    if (ck.adam->m.size() != ck.params.size() || ck.adam->v.size() != ck.params.size()) {
      throw CheckpointError("adam state does not match the parameter list");
    }
    moments.reserve(2 * ck.params.size());
    for (int which = 0; which < 2; ++which)
      for (std::size_t k = 0; k < ck.params.size(); ++k) {
        const auto& src = which == 0 ? ck.adam->m[k] : ck.adam->v[k];
        if (src.size() != ck.params[k].values.size()) {
          throw CheckpointError(fmt::format("adam moment for {} has the wrong size", ck.params[k].name));
        }
        moments.emplace_back(src.begin(), src.end());
        blocks.push_back({(which == 0 ? "adam.m/" : "adam.v/") + ck.params[k].name, &ck.params[k].shape,
                          which == 0 ? "adam_m" : "adam_v", moments.back().data(), moments.back().size()});
      }
  }

  Json header;
  header["format"] = "sfdf";
  header["net"] = net_json(ck.net);
  Json train = Json::object();
  for (const auto& [k, v] : ck.train_config) train[k] = v;
  header["train"] = train;
  header["epoch"] = ck.epoch;
  header["step"] = ck.step;
  header["adam_step"] = ck.adam ? Json(ck.adam->step) : Json(nullptr);
  Json table = Json::array();
  std::uint64_t offset = 0;
  for (const auto& b : blocks) {
    table.push_back(Json{{"name", b.name}, {"role", b.role}, {"dtype", "f32"}, {"shape", *b.shape}, {"offset", offset}});
    offset += b.n * sizeof(float);
  }
  header["tensors"] = table;
  header["payload_bytes"] = offset;
  const std::string text = header.dump(1);

  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& b : blocks) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(b.data);
    out.insert(out.end(), p, p + b.n * sizeof(float));
  }
  return out;
}

Checkpoint decode(const std::vector<std::uint8_t>& bytes) {
  constexpr std::size_t kPrefix = 4 + 4 + 8;
  if (bytes.size() < kPrefix) {
    throw CheckpointError(fmt::format("truncated checkpoint: {} bytes, missing bytes [{}, {})", bytes.size(),
                                      bytes.size(), kPrefix));
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) throw CheckpointError("not a checkpoint (bad magic)");
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError(fmt::format("unsupported checkpoint version {} (expected {})", version, kCheckpointVersion));
  }
  const auto hlen = get<std::uint64_t>(bytes, 8);
  if (hlen > bytes.size() - kPrefix) {
    throw CheckpointError(
        fmt::format("truncated checkpoint header: missing bytes [{}, {})", bytes.size(), kPrefix + hlen));
  }
  Json header;
  try {
    header = Json::parse(bytes.begin() + kPrefix, bytes.begin() + static_cast<std::ptrdiff_t>(kPrefix + hlen));
  } catch (const Json::exception& e) {
    throw CheckpointError(fmt::format("malformed checkpoint header: {}", e.what()));
  }
  const std::size_t base = kPrefix + hlen;

  Checkpoint ck;
  try {
    ck.net = net_from_json(header.at("net"));
    for (const auto& [k, v] : header.at("train").items()) ck.train_config.emplace_back(k, v.get<std::string>());
    ck.epoch = header.at("epoch").get<std::int64_t>();
    ck.step = header.at("step").get<std::int64_t>();
    const auto payload = header.at("payload_bytes").get<std::uint64_t>();
    if (base + payload > bytes.size()) {
      throw CheckpointError(fmt::format("truncated checkpoint payload: missing bytes [{}, {})", bytes.size(),
                                        base + payload));
    }
    if (base + payload < bytes.size()) {
      throw CheckpointError(fmt::format("{} trailing bytes after the checkpoint payload", bytes.size() - base - payload));
    }
    std::map<std::string, std::size_t> index;  // param name -> position
    std::uint64_t expect = 0;
    for (const auto& t : header.at("tensors")) {
      TensorRecord rec;
      rec.name = t.at("name").get<std::string>();
      rec.shape = t.at("shape").get<Shape>();
      const auto role = t.at("role").get<std::string>();
      if (t.at("dtype").get<std::string>() != "f32") throw CheckpointError(fmt::format("{}: unsupported dtype", rec.name));
      for (auto d : rec.shape)
        if (d < 0) throw CheckpointError(fmt::format("{}: negative dimension", rec.name));
      const auto off = t.at("offset").get<std::uint64_t>();
      const std::size_t n = numel(rec.shape);
      if (off != expect || off + n * sizeof(float) > payload) {
        throw CheckpointError(fmt::format("{}: offset {} inconsistent with the tensor table", rec.name, off));
      }
      expect = off + n * sizeof(float);
      rec.values.resize(n);
      if (n) std::memcpy(rec.values.data(), bytes.data() + base + off, n * sizeof(float));
      if (role == "param") {
        if (!index.emplace(rec.name, ck.params.size()).second) {
          throw CheckpointError(fmt::format("parameter {} appears twice", rec.name));
        }
        ck.params.push_back(std::move(rec));
      } else if (role == "adam_m" || role == "adam_v") {
        if (!ck.adam) ck.adam = AdamState{};
        const std::string prefix = role == "adam_m" ? "adam.m/" : "adam.v/";
        const auto it = index.find(rec.name.substr(std::min(prefix.size(), rec.name.size())));
        auto& dst = role == "adam_m" ? ck.adam->m : ck.adam->v;
        if (rec.name.rfind(prefix, 0) != 0 || it == index.end() || it->second != dst.size()) {
          throw CheckpointError(fmt::format("optimizer tensor {} does not follow the parameter order", rec.name));
        }
        dst.emplace_back(rec.values.begin(), rec.values.end());
      } else {
        throw CheckpointError(fmt::format("{}: unknown role '{}'", rec.name, role));
      }
    }
    if (expect != payload) throw CheckpointError("tensor table does not cover the payload");
    if (ck.adam) {
      if (header.at("adam_step").is_null()) throw CheckpointError("optimizer tensors without adam_step");
      ck.adam->step = header.at("adam_step").get<std::int64_t>();
      if (ck.adam->m.size() != ck.params.size() || ck.adam->v.size() != ck.params.size()) {
        throw CheckpointError("optimizer state is incomplete");
      }
    } else if (!header.at("adam_step").is_null() && !ck.params.empty()) {
      throw CheckpointError("adam_step given without optimizer tensors");
    }
  } catch (const Json::exception& e) {
    throw CheckpointError(fmt::format("malformed checkpoint header: {}", e.what()));
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(fmt::format("cannot write {}", tmp.string()));
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError(fmt::format("write failed for {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot move {} to {}: {}", tmp.string(), path.string(), ec.message()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError(fmt::format("cannot open checkpoint {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void load_weights(net::FusionNet& net, const Checkpoint& ckpt) {
  std::map<std::string, const TensorRecord*> by_name;
  for (const auto& r : ckpt.params) by_name[r.name] = &r;
  std::vector<std::string> problems;
  for (const auto& p : net.params.items()) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      problems.push_back(fmt::format("{} missing from checkpoint", p.name));
    } else if (it->second->shape != p.value.shape()) {
      problems.push_back(fmt::format("{}: checkpoint {} vs network {}", p.name, shape_str(it->second->shape),
                                     shape_str(p.value.shape())));
    }
  }
  for (const auto& r : ckpt.params)
    if (!net.params.contains(r.name)) problems.push_back(fmt::format("{} not in network", r.name));
  if (!problems.empty()) throw CheckpointError(fmt::format("checkpoint does not fit the network: {}", fmt::join(problems, "; ")));
  for (const auto& p : net.params.items()) {
    Tensor t = p.value;
    auto dst = t.mutable_data();
    const auto& src = by_name.at(p.name)->values;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<Real>(src[i]);
  }
}

net::FusionNet restore_net(const Checkpoint& ckpt) {
  try {
    net::validate(ckpt.net);
  } catch (const ConfigError& e) {
    throw CheckpointError(fmt::format("checkpoint holds an invalid network config: {}", e.what()));
  }
  auto net = net::FusionNet::create(ckpt.net, 0);
  load_weights(net, ckpt);
  return net;
}

}  // namespace sfd::training
