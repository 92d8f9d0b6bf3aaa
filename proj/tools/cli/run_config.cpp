// SPDX-License-Identifier: Apache-2.0
#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "idn/error.hpp"

namespace idn::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

RunConfig::RunConfig() {
  const IdnConfig m;
  values_ = {
      {"model.preset", "default"},
      {"model.scale", std::to_string(m.scale)},
      {"model.num_dblocks", std::to_string(m.num_dblocks)},
      {"model.d3", std::to_string(m.d3)},
      {"model.d", std::to_string(m.d)},
      {"model.s", std::to_string(m.s)},
      {"model.groups", std::to_string(m.groups)},
      {"model.feat_channels", std::to_string(m.feat_channels)},
      {"model.rblock_kernel", std::to_string(m.rblock_kernel)},
      {"model.lrelu_slope", "0.05"},
      {"train.lr", "1e-4"},
      {"train.batch", "64"},
      {"train.pretrain_iters", "100000"},
      {"train.mae_iters", "200000"},
      {"train.finetune_iters", "100000"},
      {"train.log_every", "100"},
      {"train.checkpoint_every", "1000"},
      {"train.weight_decay", "1e-4"},
      {"train.beta1", "0.9"},
      {"train.beta2", "0.999"},
      {"train.eps", "1e-8"},
      {"train.patch", "0"},
      {"train.finetune_patch", "0"},
      {"train.augment", "true"},
      {"train.cache", "512"},
      {"eval.shave", "scale"},
      {"eval.quantize", "false"},
  };
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  parse_text(ss.str(), path.string());
}

void RunConfig::parse_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  const std::string old = it->second;
  it->second = value;
  // Validate eagerly so typos surface at the assignment.
  try {
    if (key == "model.preset") {
      if (value != "default" && value != "tiny") throw ConfigError("expected default or tiny");
    } else if (key == "eval.shave") {
      if (value != "scale") get_size(key);
    } else if (key == "train.augment" || key == "eval.quantize") {
      get_bool(key);
    } else if (key == "model.lrelu_slope" || key.rfind("train.lr", 0) == 0 ||
               key == "train.weight_decay" || key == "train.beta1" || key == "train.beta2" ||
               key == "train.eps") {
      get_double(key);
    } else {
      get_size(key);
    }
  } catch (const ConfigError& e) {
    it->second = old;
    throw ConfigError("bad value '" + value + "' for " + key + ": " + e.what());
  }
  explicit_.insert(key);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(std::string_view(assignment).substr(0, eq)),
      trim(std::string_view(assignment).substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + " expects a non-negative integer");
  }
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + " expects a number");
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + " expects true or false");
}

std::vector<std::string> RunConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

IdnConfig RunConfig::model() const {
  const std::size_t scale = get_size("model.scale");
  IdnConfig c = get("model.preset") == "tiny" ? tiny_config(scale) : IdnConfig{};
  c.scale = scale;
  auto take = [&](const char* key, std::size_t& field) {
    if (get("model.preset") == "default" || explicitly_set(key)) field = get_size(key);
  };
  take("model.num_dblocks", c.num_dblocks);
  take("model.d3", c.d3);
  take("model.d", c.d);
  take("model.s", c.s);
  take("model.groups", c.groups);
  take("model.feat_channels", c.feat_channels);
  take("model.rblock_kernel", c.rblock_kernel);
  c.lrelu_slope = static_cast<float>(get_double("model.lrelu_slope"));
  c.validate();
  return c;
}

TrainSchedule RunConfig::schedule(std::uint64_t seed) const {
  const std::size_t m = get_size("model.scale");
  TrainSchedule s = TrainSchedule::standard(m, get_size("train.pretrain_iters"),
                                            get_size("train.mae_iters"),
                                            get_size("train.finetune_iters"),
                                            get_double("train.lr"));
  if (const std::size_t l = get_size("train.patch"); l > 0) {
    s.phases[0].patch = s.phases[1].patch = PatchSpec::make(m, l, PatchPhase::Training);
  }
  if (const std::size_t l = get_size("train.finetune_patch"); l > 0) {
    s.phases[2].patch = PatchSpec::make(m, l, PatchPhase::FineTuning);
  }
  s.batch_size = get_size("train.batch");
  s.seed = seed;
  s.log_every = get_size("train.log_every");
  s.checkpoint_every = get_size("train.checkpoint_every");
  s.adam.weight_decay = get_double("train.weight_decay");
  s.adam.beta1 = get_double("train.beta1");
  s.adam.beta2 = get_double("train.beta2");
  s.adam.eps = get_double("train.eps");
  s.validate();
  return s;
}

EvalProtocol RunConfig::protocol() const {
  EvalProtocol p;
  if (get("eval.shave") != "scale") p.shave = get_size("eval.shave");
  p.quantize = get_bool("eval.quantize");
  return p;
}

}  // namespace idn::cli
