#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace whype {

// %.17g: shortest form that round-trips IEEE doubles, so exported files are
// byte-stable and load/export is an exact identity.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t lineno,
                                    const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
}

inline double parse_double(const std::string& s, const std::string& path,
                           std::size_t lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(path, lineno, "not a number: '" + s + "'");
  }
}

inline double parse_finite(const std::string& s, const std::string& path,
                           std::size_t lineno) {
  double v = parse_double(s, path, lineno);
  if (!std::isfinite(v)) parse_fail(path, lineno, "non-finite value: '" + s + "'");
  return v;
}

inline long parse_int(const std::string& s, const std::string& path,
                      std::size_t lineno) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(path, lineno, "not an integer: '" + s + "'");
  }
}

// Content lines only; blank lines and '#' comments are skipped but still
// counted so error messages name the real line.
inline std::vector<std::pair<std::size_t, std::string>> read_csv_lines(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    rows.emplace_back(lineno, line);
  }
  return rows;
}

}  // namespace detail

// FNV-1a, used to stamp every output artifact with the config that made it.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hash_hex(const std::string& s) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

}  // namespace whype
