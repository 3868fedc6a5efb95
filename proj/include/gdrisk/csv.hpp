#pragma once

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace gdrisk {

// Shortest round-trippable decimal form; identical bytes for identical
// doubles, which is what the reproducibility contract for emitted files
// rests on.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using CsvCell = std::variant<std::int64_t, double, std::string>;

// Minimal CSV emitter: header row first, stable column order, one row per
// call.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string> columns) { write_strings(columns); }

  void row(std::initializer_list<CsvCell> cells) {
    bool first = true;
    for (const CsvCell& cell : cells) {
      if (!first) out_ << ',';
      first = false;
      if (std::holds_alternative<std::int64_t>(cell)) {
        out_ << std::get<std::int64_t>(cell);
      } else if (std::holds_alternative<double>(cell)) {
        out_ << format_double(std::get<double>(cell));
      } else {
        out_ << std::get<std::string>(cell);
      }
    }
    out_ << '\n';
  }

 private:
  void write_strings(std::initializer_list<std::string> items) {
    bool first = true;
    for (const std::string& item : items) {
      if (!first) out_ << ',';
      first = false;
      out_ << item;
    }
    out_ << '\n';
  }

  std::ostream& out_;
};

}  // namespace gdrisk
