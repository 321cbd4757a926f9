// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/time.hpp"

#include <charconv>
#include <cstdio>

#include "darkwatch/error.hpp"

namespace darkwatch {

namespace {

using namespace std::chrono;

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw DataError("truncated date/time: '" + std::string(text) + "'");
  int value = 0;
  auto sv = text.substr(pos, len);
  for (char c : sv) {
    if (c < '0' || c > '9') throw DataError("bad digit in date/time: '" + std::string(text) + "'");
  }
  std::from_chars(sv.data(), sv.data() + sv.size(), value);
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw DataError("malformed date/time: '" + std::string(text) + "'");
  }
}

}  // namespace

Day parse_date(std::string_view text) {
  if (text.size() != 10) throw DataError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  int y = parse_fixed(text, 0, 4);
  expect_char(text, 4, '-');
  int m = parse_fixed(text, 5, 2);
  expect_char(text, 7, '-');
  int d = parse_fixed(text, 8, 2);
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
  return sys_days{ymd};
}

Timestamp parse_timestamp(std::string_view text) {
  if (text.size() < 19) throw DataError("expected ISO-8601 timestamp, got '" + std::string(text) + "'");
  Day date = parse_date(text.substr(0, 10));
  if (text[10] != 'T' && text[10] != ' ') throw DataError("malformed timestamp '" + std::string(text) + "'");
  int hh = parse_fixed(text, 11, 2);
  expect_char(text, 13, ':');
  int mm = parse_fixed(text, 14, 2);
  expect_char(text, 16, ':');
  int ss = parse_fixed(text, 17, 2);
  auto rest = text.substr(19);
  if (!(rest.empty() || rest == "Z" || rest == "+00:00")) {
    throw DataError("unsupported timestamp suffix in '" + std::string(text) + "'");
  }
  if (hh > 23 || mm > 59 || ss > 60) throw DataError("time of day out of range in '" + std::string(text) + "'");
  return Timestamp{date} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_date(Day d) {
  year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp ts) {
  Day d = day_of(ts);
  auto tod = ts - Timestamp{d};
  hh_mm_ss<seconds> hms{tod};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(d) + buf;
}

Day month_start(Day d) {
  year_month_day ymd{d};
  return sys_days{ymd.year() / ymd.month() / 1};
}

Day month_end(Day d) {
  year_month_day ymd{d};
  return sys_days{year_month_day_last{ymd.year(), month_day_last{ymd.month()}}};
}

Day add_months(Day d, int months) {
  year_month_day ymd{month_start(d)};
  year_month ym = ymd.year() / ymd.month();
  ym += std::chrono::months{months};
  return sys_days{ym / 1};
}

int months_touched(Day first, Day last) {
  if (last < first) return 0;
  year_month_day a{first}, b{last};
  return (static_cast<int>(b.year()) - static_cast<int>(a.year())) * 12 +
         static_cast<int>(static_cast<unsigned>(b.month())) -
         static_cast<int>(static_cast<unsigned>(a.month())) + 1;
}

IsoWeek iso_week(Day d) {
  // The ISO week belongs to the year containing its Thursday.
  weekday wd{d};
  int iso_wd = static_cast<int>(wd.iso_encoding());  // Mon=1..Sun=7
  Day thursday = d + days{4 - iso_wd};
  year y = year_month_day{thursday}.year();
  Day jan1 = sys_days{y / January / 1};
  auto week = static_cast<unsigned>((thursday - jan1).count() / 7 + 1);
  return {static_cast<int>(y), week};
}

std::string format_range(const DayRange& range) {
  return format_date(range.first) + ".." + format_date(range.last);
}

}  // namespace darkwatch
