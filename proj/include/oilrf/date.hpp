#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace oilrf {

// Calendar day stored as days since 1970-01-01 (proleptic Gregorian).
// Cheap to compare and subtract, which is all the panel logic needs.
class Date {
 public:
  Date() = default;
  constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}
  static Date from_ymd(int year, int month, int day);

  // Parses strict ISO-8601 "YYYY-MM-DD"; throws DataError otherwise.
  static Date parse(std::string_view text);

  std::int32_t days() const { return days_; }
  std::string to_string() const;

  // 0 = Monday ... 6 = Sunday.
  int weekday() const;
  bool is_weekend() const { return weekday() >= 5; }

  Date operator+(int n) const { return Date(days_ + n); }
  Date operator-(int n) const { return Date(days_ - n); }
  std::int32_t operator-(Date other) const { return days_ - other.days_; }
  auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_ = 0;
};

}  // namespace oilrf
