// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "idn/metrics.hpp"
#include "idn/model.hpp"
#include "idn/training.hpp"

namespace idn::cli {

/// Every tunable as a dotted key. Values start at their defaults, then a
/// key=value file is applied, then command-line overrides. Unknown keys and
/// unparsable values throw ConfigError.
class RunConfig {
 public:
  RunConfig();

  void load_file(const std::filesystem::path& path);
  void parse_text(std::string_view text, const std::string& origin = "config");
  void set(const std::string& key, const std::string& value);
  /// "key=value"
  void set_assignment(const std::string& assignment);

  bool known(const std::string& key) const { return values_.count(key) != 0; }
  bool explicitly_set(const std::string& key) const { return explicit_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> keys() const;

  IdnConfig model() const;
  TrainSchedule schedule(std::uint64_t seed) const;
  EvalProtocol protocol() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

}  // namespace idn::cli
