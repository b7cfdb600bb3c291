#include "sfd/training/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <fmt/format.h>

#include "sfd/core/error.hpp"

namespace sfd::training {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(fmt::format("{}: not an integer: '{}'", key, v));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: not a number: '{}'", key, v));
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("{}: not a boolean: '{}'", key, v));
}

// Shortest text that reads back to the same double.
std::string num(double d) {
  return fmt::format("{}", d);
}

std::string flag(bool b) { return b ? "true" : "false"; }

}  // namespace

void validate(const TrainConfig& c) {
  if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (c.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (c.crop < 8) throw ConfigError("crop must be >= 8");
  if (!(c.adam.lr > 0)) throw ConfigError("lr must be > 0");
  if (!(c.adam.beta1 >= 0 && c.adam.beta1 < 1) || !(c.adam.beta2 >= 0 && c.adam.beta2 < 1)) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(c.adam.eps > 0)) throw ConfigError("eps must be > 0");
  if (c.lr_schedule != "constant") throw ConfigError(fmt::format("unknown lr_schedule '{}'", c.lr_schedule));
  if (c.max_pairs < 0) throw ConfigError("max_pairs must be >= 0");
  losses::validate(c.weights);
  net::validate(c.net);
}

std::vector<std::pair<std::string, std::string>> to_pairs(const TrainConfig& c) {
  return {
      {"dataset", c.dataset.string()},
      {"out_dir", c.out_dir.string()},
      {"batch_size", std::to_string(c.batch_size)},
      {"epochs", std::to_string(c.epochs)},
      {"crop", std::to_string(c.crop)},
      {"seed", std::to_string(c.seed)},
      {"max_pairs", std::to_string(c.max_pairs)},
      {"lr", num(c.adam.lr)},
      {"beta1", num(c.adam.beta1)},
      {"beta2", num(c.adam.beta2)},
      {"eps", num(c.adam.eps)},
      {"lr_schedule", c.lr_schedule},
      {"clip_norm", num(c.clip_norm)},
      {"lambda_s", num(c.weights.lambda_s)},
      {"alpha_1", num(c.weights.alpha_1)},
      {"alpha_2", num(c.weights.alpha_2)},
      {"beta", num(c.weights.beta)},
      {"fre_literal_sign", flag(c.fre_literal_sign)},
      {"d", std::to_string(c.net.d)},
      {"c", std::to_string(c.net.c)},
      {"log_amplitude", flag(c.net.log_amplitude)},
      {"use_dmrm", flag(c.net.ablation.use_dmrm)},
      {"use_fdfm", flag(c.net.ablation.use_fdfm)},
      {"use_lfre", flag(c.net.ablation.use_lfre)},
      {"keep_epoch_checkpoints", flag(c.keep_epoch_checkpoints)},
  };
}

std::string to_text(const TrainConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_pairs(config)) out += k + " = " + v + "\n";
  return out;
}

void set_field(TrainConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "dataset") c.dataset = v;
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "batch_size") c.batch_size = parse_int<int>(key, v);
  else if (key == "epochs") c.epochs = parse_int<int>(key, v);
  else if (key == "crop") c.crop = parse_int<int>(key, v);
  else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, v);
  else if (key == "max_pairs") c.max_pairs = parse_int<int>(key, v);
  else if (key == "lr") c.adam.lr = parse_double(key, v);
  else if (key == "beta1") c.adam.beta1 = parse_double(key, v);
  else if (key == "beta2") c.adam.beta2 = parse_double(key, v);
  else if (key == "eps") c.adam.eps = parse_double(key, v);
  else if (key == "lr_schedule") c.lr_schedule = v;
  else if (key == "clip_norm") c.clip_norm = parse_double(key, v);
  else if (key == "lambda_s") c.weights.lambda_s = parse_double(key, v);
  else if (key == "alpha_1") c.weights.alpha_1 = parse_double(key, v);
  else if (key == "alpha_2") c.weights.alpha_2 = parse_double(key, v);
  else if (key == "beta") c.weights.beta = parse_double(key, v);
  else if (key == "fre_literal_sign") c.fre_literal_sign = parse_bool(key, v);
  else if (key == "d") c.net.d = parse_int<int>(key, v);
  else if (key == "c") c.net.c = parse_int<int>(key, v);
  else if (key == "log_amplitude") c.net.log_amplitude = parse_bool(key, v);
  else if (key == "use_dmrm") c.net.ablation.use_dmrm = parse_bool(key, v);
  else if (key == "use_fdfm") c.net.ablation.use_fdfm = parse_bool(key, v);
  else if (key == "use_lfre") c.net.ablation.use_lfre = parse_bool(key, v);
  else if (key == "keep_epoch_checkpoints") c.keep_epoch_checkpoints = parse_bool(key, v);
  else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

void apply_override(TrainConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(fmt::format("expected key=value, got '{}'", assignment));
  set_field(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

TrainConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", lineno));
    try {
      set_field(c, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  if (!base_dir.empty()) {
    if (!c.dataset.empty() && c.dataset.is_relative()) c.dataset = base_dir / c.dataset;
    if (c.out_dir.is_relative()) c.out_dir = base_dir / c.out_dir;
  }
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError(fmt::format("cannot read config {}", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

losses::LossOptions loss_options(const TrainConfig& config) {
  losses::LossOptions o;
  o.weights = config.weights;
  o.use_lfre = config.net.ablation.use_lfre;
  o.fre_sign = config.fre_literal_sign ? losses::FreSign::Literal : losses::FreSign::Corrected;
  return o;
}

}  // namespace sfd::training
