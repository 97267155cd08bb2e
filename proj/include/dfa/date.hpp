#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace dfa {

using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`. Returns nullopt on anything else.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

inline int year_of(const Date& d) { return static_cast<int>(d.year()); }
inline int month_of(const Date& d) { return static_cast<int>(static_cast<unsigned>(d.month())); }

/// Calendar month key, ordered chronologically.
struct YearMonth {
  int year = 0;
  int month = 1;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  static YearMonth of(const Date& d) { return {year_of(d), month_of(d)}; }
  YearMonth next() const { return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1}; }
};

/// Calendar quarter key, ordered chronologically.
struct Quarter {
  int year = 0;
  int quarter = 1;  // 1..4

  auto operator<=>(const Quarter&) const = default;

  static Quarter of(const Date& d) { return {year_of(d), (month_of(d) - 1) / 3 + 1}; }
  Quarter next() const { return quarter == 4 ? Quarter{year + 1, 1} : Quarter{year, quarter + 1}; }
  Quarter prev() const { return quarter == 1 ? Quarter{year - 1, 4} : Quarter{year, quarter - 1}; }
  YearMonth month(int i) const { return {year, (quarter - 1) * 3 + i + 1}; }  // i in 0..2
};

std::string format_quarter(const Quarter& q);  // "2015Q1"
std::optional<Quarter> parse_quarter(std::string_view text);

}  // namespace dfa
