#include "dcs/date.hpp"

#include <charconv>
#include <cstdio>

#include "dcs/error.hpp"

namespace dcs {

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day)
    : ymd_{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}} {
  if (!ymd_.ok())
    throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                          std::to_string(month) + "-" + std::to_string(day));
}

Date Date::parse(std::string_view iso) {
  unsigned y = 0, m = 0, d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' || !parse_uint(iso.substr(0, 4), y) ||
      !parse_uint(iso.substr(5, 2), m) || !parse_uint(iso.substr(8, 2), d))
    throw ValidationError("expected date YYYY-MM-DD, got '" + std::string(iso) + "'");
  return Date(static_cast<int>(y), m, d);
}

long Date::days() const noexcept {
  return static_cast<long>(std::chrono::sys_days{ymd_}.time_since_epoch().count());
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

}  // namespace dcs
