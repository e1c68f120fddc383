#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rzq::cli {

/// Bad flags, unknown keys, unparseable values. Exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string key;
  std::string fallback;
  std::string help;
};

/// Flat key -> text map. Values come from defaults, then a key=value file,
/// then command-line flags, each layer overriding the previous one.
class RunConfig {
 public:
  explicit RunConfig(const std::vector<KeySpec>& keys) {
    for (const auto& k : keys) {
      values_[k.key] = k.fallback;
      order_.push_back(k.key);
    }
  }

  bool knows(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    if (!knows(key)) throw UsageError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  /// Lines "key = value"; '#' starts a comment; blank lines ignored.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      const std::string key = trim(line.substr(0, eq));
      if (key.empty() && eq == std::string::npos) continue;
      if (eq == std::string::npos || key.empty()) {
        throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
      }
      if (!knows(key)) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
      values_[key] = trim(line.substr(eq + 1));
    }
  }

  const std::string& text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const {
    const std::string& s = text(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("config key '" + key + "': not a number: '" + s + "'");
    return v;
  }

  long integer(const std::string& key) const {
    const double v = number(key);
    if (v != static_cast<double>(static_cast<long>(v))) {
      throw UsageError("config key '" + key + "': expected an integer, got '" + text(key) + "'");
    }
    return static_cast<long>(v);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || used == 0) throw UsageError("config key '" + key + "': not a number: '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  std::vector<long> integers(const std::string& key) const {
    std::vector<long> out;
    for (double v : numbers(key)) {
      if (v != static_cast<double>(static_cast<long>(v))) throw UsageError("config key '" + key + "': expected integers");
      out.push_back(static_cast<long>(v));
    }
    return out;
  }

  /// (key, value) in declaration order.
  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : order_) out.emplace_back(k, values_.at(k));
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace rzq::cli
