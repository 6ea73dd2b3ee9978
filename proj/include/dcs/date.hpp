#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace dcs {

/// Calendar date, parsed from and printed as ISO-8601 `YYYY-MM-DD`.
class Date {
 public:
  Date() = default;
  Date(int year, unsigned month, unsigned day);

  /// Throws ValidationError on anything other than a valid `YYYY-MM-DD`.
  static Date parse(std::string_view iso);

  int year() const noexcept { return static_cast<int>(ymd_.year()); }
  unsigned month() const noexcept { return static_cast<unsigned>(ymd_.month()); }
  unsigned day() const noexcept { return static_cast<unsigned>(ymd_.day()); }

  /// Days since 1970-01-01.
  long days() const noexcept;

  std::string iso() const;

  friend bool operator==(const Date& a, const Date& b) noexcept { return a.ymd_ == b.ymd_; }
  friend auto operator<=>(const Date& a, const Date& b) noexcept { return a.days() <=> b.days(); }

 private:
  std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1},
                                   std::chrono::day{1}};
};

}  // namespace dcs
