#pragma once

// Deterministic text primitives shared by the scenario, policy, and report
// file formats: every floating-point value is rendered with 17 significant
// digits (the shortest count that round-trips any IEEE double), parsing is
// locale-independent and consumes whole tokens, and identical in-memory
// content always serializes to identical bytes.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace drds::io {

// Raised by every reader in this module on malformed input; the CLI maps it
// to the bad-input exit code.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lossless text form of a double: 17 significant digits, C locale.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError(where + ": expected a number, got \"" + tok + "\"");
  if (errno == ERANGE) throw ParseError(where + ": number out of range: \"" + tok + "\"");
  return v;
}

inline long long parse_int(const std::string& tok, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError(where + ": expected an integer, got \"" + tok + "\"");
  if (errno == ERANGE) throw ParseError(where + ": integer out of range: \"" + tok + "\"");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  return s;
}

}  // namespace drds::io
