#include "dfa/date.hpp"

#include <charconv>
#include <cstdio>

namespace dfa {

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::string format_quarter(const Quarter& q) {
  return std::to_string(q.year) + "Q" + std::to_string(q.quarter);
}

std::optional<Quarter> parse_quarter(std::string_view text) {
  const auto pos = text.find('Q');
  if (pos == std::string_view::npos) return std::nullopt;
  Quarter q;
  if (!parse_int(text.substr(0, pos), q.year) || !parse_int(text.substr(pos + 1), q.quarter)) {
    return std::nullopt;
  }
  if (q.quarter < 1 || q.quarter > 4) return std::nullopt;
  return q;
}

}  // namespace dfa
