#pragma once

// Minimal CSV with '#'-prefixed "key: value" provenance lines.

#include <string>
#include <utility>
#include <vector>

namespace subord::csv {

struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_meta(std::string key, std::string value);
  /// Value of a meta key, or "" when absent.
  std::string meta_value(const std::string& key) const;
};

/// Shortest round-trip representation ("%.17g" style, no trailing noise).
std::string number(double v);
std::string number(std::size_t v);

std::string to_string(const Table& t);

/// Writes to a temporary file next to `path` and renames it into place, so
/// a failed run never leaves a partial file. Throws std::runtime_error.
void write_file(const std::string& path, const std::string& content);
void write(const std::string& path, const Table& t);

/// Parses meta lines, one header row and data rows. Throws std::runtime_error.
Table read(const std::string& path);
Table parse(const std::string& text);

}  // namespace subord::csv
