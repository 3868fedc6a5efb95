#include "gdrisk/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gdrisk/errors.hpp"

namespace gdrisk {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
      }
      cfg.sections_[section];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any [section]");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.sections_[section][key] = trim(body.substr(eq + 1));
  }
  return cfg;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  const std::string path = trim(assignment.substr(0, eq));
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  sections_[path.substr(0, dot)][path.substr(dot + 1)] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  return sec != sections_.end() && sec->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  if (sec != sections_.end()) {
    const auto it = sec->second.find(key);
    if (it != sec->second.end()) return it->second;
  }
  throw ConfigError("missing config entry [" + section + "] " + key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

namespace {

double parse_double(const std::string& raw, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(context + ": not a number: '" + raw + "'");
  }
  return value;
}

std::int64_t parse_int(const std::string& raw, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const long long value = std::strtoll(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(context + ": not an integer: '" + raw + "'");
  }
  return value;
}

std::uint64_t parse_uint64(const std::string& raw, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(context + ": not an unsigned integer: '" + raw + "'");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = item.find_last_not_of(" \t");
    parts.push_back(item.substr(begin, end - begin + 1));
  }
  return parts;
}

}  // namespace

double Config::get_double(const std::string& section, const std::string& key) const {
  return parse_double(get_string(section, key), "[" + section + "] " + key);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key) const {
  return parse_int(get_string(section, key), "[" + section + "] " + key);
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t Config::get_uint64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  return parse_uint64(get_string(section, key), "[" + section + "] " + key);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get_string(section, key);
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
  throw ConfigError("[" + section + "] " + key + ": not a boolean: '" + raw + "'");
}

std::vector<double> Config::get_double_list(const std::string& section,
                                            const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(get_string(section, key))) {
    out.push_back(parse_double(item, "[" + section + "] " + key));
  }
  return out;
}

std::vector<std::int64_t> Config::get_int_list(const std::string& section,
                                               const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const std::string& item : split_list(get_string(section, key))) {
    out.push_back(parse_int(item, "[" + section + "] " + key));
  }
  return out;
}

std::vector<std::string> Config::get_string_list(const std::string& section,
                                                 const std::string& key) const {
  return split_list(get_string(section, key));
}

}  // namespace gdrisk
