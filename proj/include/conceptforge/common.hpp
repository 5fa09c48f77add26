#pragma once
// Shared primitives: error type, calendar day, small string helpers.

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conceptforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A calendar day. Ordered, hashable through `days_since_epoch()`.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days d) : day_(d) {}

  /// Parses strict `YYYY-MM-DD`; throws Error on anything else.
  static Date parse(std::string_view text);
  static bool try_parse(std::string_view text, Date& out);

  std::string str() const;
  std::chrono::sys_days sys_days() const { return day_; }
  std::int64_t days_since_epoch() const { return day_.time_since_epoch().count(); }

  Date plus_days(std::int64_t n) const { return Date(day_ + std::chrono::days(n)); }
  std::int64_t days_until(const Date& other) const {
    return (other.day_ - day_).count();
  }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days day_{};
};

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);

/// Decodes UTF-8 into code point boundaries; invalid bytes are treated as single units.
std::vector<std::size_t> utf8_boundaries(std::string_view s);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace conceptforge
