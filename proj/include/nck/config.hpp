#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nck/types.hpp"

namespace nck {

/// Flat key-value configuration with [section] headers. One entry per line,
/// `key = value`, `#` starts a comment, repeated keys accumulate (used for
/// mixture components). Lookups are by (section, key); typed getters parse
/// on demand and fail loudly with the config location.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;

  Scalar get_scalar(const std::string& section, const std::string& key) const;
  Scalar get_scalar(const std::string& section, const std::string& key, Scalar fallback) const;

  Index get_index(const std::string& section, const std::string& key) const;
  Index get_index(const std::string& section, const std::string& key, Index fallback) const;

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  /// Whitespace-separated scalar list.
  std::vector<Scalar> get_scalars(const std::string& section, const std::string& key) const;
  std::vector<Scalar> get_scalars(const std::string& section, const std::string& key,
                                  const std::vector<Scalar>& fallback) const;

  /// Whitespace-separated token list.
  std::vector<std::string> get_strings(const std::string& section,
                                       const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& section, const std::string& key,
                                       const std::vector<std::string>& fallback) const;

  /// Every value bound to a repeated key, in file order.
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  /// Overrides or appends an entry (used for CLI flag overrides).
  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Canonical serialization; parsing it back reproduces the same table.
  std::string serialize() const;

 private:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
  };

  const Entry* find(const std::string& section, const std::string& key) const;

  std::vector<Entry> entries_;
};

}  // namespace nck
