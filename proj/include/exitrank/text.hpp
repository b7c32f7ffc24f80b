#ifndef EXITRANK_TEXT_HPP
#define EXITRANK_TEXT_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

namespace exitrank {

/// Shortest decimal form that parses back to the same double.
/// Used everywhere a double is written to text so that outputs are
/// byte-deterministic and round-trips are exact.
inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Strict full-token parse; returns false on trailing garbage or empty input.
inline bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

inline bool parse_int(std::string_view token, long long& out) {
  if (token.empty()) return false;
  auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

inline std::string_view strip(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace exitrank

#endif  // EXITRANK_TEXT_HPP
