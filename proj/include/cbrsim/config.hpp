#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbrsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "dotted.key = value" document. Lines starting with '#' (or blank
// lines) are ignored; later assignments override earlier ones.
class ConfigDoc {
 public:
  ConfigDoc() = default;

  static ConfigDoc parse(const std::string& text);
  static ConfigDoc load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Comma-separated list; single values come back as one-element lists.
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

  // Keys read through any getter so far; used to flag unknown keys.
  std::vector<std::string> unread_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> read_;
};

std::string trim(const std::string& s);

}  // namespace cbrsim
