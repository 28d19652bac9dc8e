// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "unimatte/error.hpp"

namespace unimatte {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

const std::vector<std::string>& KeyValueConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "base_lr",      "beta1",         "beta2",       "lambda",     "poly_power",
      "warmup_iters", "max_iters",     "epochs",      "batch_size", "group_size",
      "batch_groups", "augment",       "crop",        "snapshot_every", "seed",
      "model_profile", "stage_widths", "unknown_band", "point_sigma", "bbox_margin",
      "max_pixels",   "idle_timeout_s"};
  return keys;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    kv.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void KeyValueConfig::apply_environment(const std::map<std::string, std::string>& env) {
  for (const auto& key : known_keys())
    if (const auto it = env.find("UNIMATTE_" + upper(key)); it != env.end()) set(key, it->second);
}

void KeyValueConfig::apply_process_environment() {
  std::map<std::string, std::string> env;
  for (const auto& key : known_keys()) {
    const std::string name = "UNIMATTE_" + upper(key);
    if (const char* v = std::getenv(name.c_str())) env[name] = v;
  }
  apply_environment(env);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw InvalidInput("unknown config key '" + key + "'");
  values_[key] = value;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw InvalidInput("config " + key + ": expected a number, got '" + *v + "'");
  }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::int64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
  if (ec != std::errc{} || ptr != v->data() + v->size())
    throw InvalidInput("config " + key + ": expected an integer, got '" + *v + "'");
  return x;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  throw InvalidInput("config " + key + ": expected a boolean, got '" + *v + "'");
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

TrainConfig train_config_from(const KeyValueConfig& kv, TrainStage stage) {
  TrainConfig c;
  c.stage = stage;
  if (stage == TrainStage::pretrain) {
    c.epochs = 20;
    c.warmup_iters = 0;
  }
  c.base_lr = kv.get_double("base_lr", c.base_lr);
  c.beta1 = kv.get_double("beta1", c.beta1);
  c.beta2 = kv.get_double("beta2", c.beta2);
  c.lambda = kv.get_double("lambda", c.lambda);
  c.poly_power = kv.get_double("poly_power", c.poly_power);
  c.warmup_iters = kv.get_int("warmup_iters", c.warmup_iters);
  c.max_iters = kv.get_int("max_iters", c.max_iters);
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  c.batch_size = static_cast<int>(kv.get_int("batch_size", c.batch_size));
  c.group_size = static_cast<int>(kv.get_int("group_size", c.group_size));
  c.batch_groups = static_cast<int>(kv.get_int("batch_groups", c.batch_groups));
  c.augment = kv.get_bool("augment", c.augment);
  c.augment_cfg.crop = static_cast<int>(kv.get_int("crop", c.augment_cfg.crop));
  c.snapshot_every = kv.get_int("snapshot_every", c.snapshot_every);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

ModelConfig model_config_from(const KeyValueConfig& kv, InteractionKind kind) {
  const std::string profile = kv.get_string("model_profile", "desk");
  ModelConfig m;
  if (profile == "toy")
    m = ModelConfig::toy(kind);
  else if (profile == "desk")
    m = ModelConfig::desk(kind);
  else if (profile == "full")
    m = ModelConfig::full(kind);
  else
    throw InvalidInput("config model_profile: expected toy, desk or full");
  if (const auto w = kv.get("stage_widths")) {
    m.stage_widths.clear();
    std::stringstream ss(*w);
    std::string part;
    while (std::getline(ss, part, ',')) {
      int x = 0;
      const std::string t = trim(part);
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
      if (ec != std::errc{} || ptr != t.data() + t.size())
        throw InvalidInput("config stage_widths: expected comma-separated integers");
      m.stage_widths.push_back(x);
    }
  }
  m.validate();
  return m;
}

SimulationOptions simulation_options_from(const KeyValueConfig& kv) {
  SimulationOptions s;
  s.point_sigma = kv.get_double("point_sigma", s.point_sigma);
  s.bbox_margin = static_cast<int>(kv.get_int("bbox_margin", s.bbox_margin));
  return s;
}

}  // namespace unimatte
