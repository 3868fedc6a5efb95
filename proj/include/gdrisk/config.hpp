#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gdrisk {

// Sectioned key = value config files:
//
//   [instance]
//   family = inv_poly
//   alpha = 2          # comments start with '#'
//
// Overrides arrive as "section.key=value" strings from the command line and
// simply replace (or insert) entries after the file is read.
class Config {
 public:
  Config() = default;

  static Config load_file(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin = "<string>");

  void apply_override(const std::string& assignment);  // "section.key=value"

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;

  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;

  std::uint64_t get_uint64(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  // Comma-separated lists.
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace gdrisk
