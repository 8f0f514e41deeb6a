#include "subord/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace subord::csv {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

void Table::add_meta(std::string key, std::string value) {
  meta.emplace_back(std::move(key), std::move(value));
}

std::string Table::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return {};
}

std::string number(double v) {
  char buf[32];
  // Shortest of %.15g..%.17g that reads back exactly.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string number(std::size_t v) { return std::to_string(v); }

std::string to_string(const Table& t) {
  std::ostringstream os;
  for (const auto& [k, v] : t.meta) os << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + path);
  }
}

void write(const std::string& path, const Table& t) { write_file(path, to_string(t)); }

Table parse(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(1);
      const auto colon = body.find(':');
      if (colon == std::string::npos) t.add_meta(trim(body), "");
      else t.add_meta(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
      continue;
    }
    auto cells = split(line);
    for (auto& c : cells) c = trim(c);
    if (!have_header) {
      t.columns = std::move(cells);
      have_header = true;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

Table read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

}  // namespace subord::csv
