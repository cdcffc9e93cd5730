#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>

namespace esplace::csv {

// Shortest round-trip decimal form; independent of the global locale.
inline std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

inline std::string number(std::int64_t v) { return std::to_string(v); }
inline std::string number(std::uint64_t v) { return std::to_string(v); }
inline std::string number(int v) { return std::to_string(v); }

// RFC-4180 quoting, only when needed.
inline std::string field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((emit(cells, first)), ...);
    out_ << "\r\n";
  }

 private:
  template <typename T>
  void emit(const T& cell, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_convertible_v<const T&, std::string_view>)
      out_ << field(cell);
    else
      out_ << number(cell);
  }

  std::ostream& out_;
};

}  // namespace esplace::csv
