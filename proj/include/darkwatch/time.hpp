// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>

namespace darkwatch {

using Day = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Parses `YYYY-MM-DD`. Throws DataError on malformed input or impossible dates.
Day parse_date(std::string_view text);

/// Parses ISO-8601 `YYYY-MM-DDTHH:MM:SS` with an optional trailing `Z` or
/// `+00:00`. A space is accepted in place of `T`. Times are UTC.
Timestamp parse_timestamp(std::string_view text);

std::string format_date(Day day);
std::string format_timestamp(Timestamp ts);

inline Day day_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

Day month_start(Day day);
Day month_end(Day day);
/// First day of the month `months` calendar months after the month holding `day`.
Day add_months(Day day, int months);
/// Number of distinct calendar months touched by [first, last].
int months_touched(Day first, Day last);

struct IsoWeek {
  int year;
  unsigned week;
  auto operator<=>(const IsoWeek&) const = default;
};

IsoWeek iso_week(Day day);

/// Inclusive range of days.
struct DayRange {
  Day first;
  Day last;

  [[nodiscard]] bool contains(Day d) const { return first <= d && d <= last; }
  [[nodiscard]] bool empty() const { return last < first; }
  [[nodiscard]] std::size_t size() const {
    return empty() ? 0 : static_cast<std::size_t>((last - first).count() + 1);
  }
  /// Zero-based offset of `d` from `first`.
  [[nodiscard]] std::ptrdiff_t index_of(Day d) const { return (d - first).count(); }
  [[nodiscard]] Day at(std::size_t i) const { return first + std::chrono::days(i); }

  bool operator==(const DayRange&) const = default;
};

std::string format_range(const DayRange& range);

enum class WindowKind { Subsequence, History, Lag };

struct TimeWindow {
  DayRange days;
  WindowKind kind = WindowKind::Subsequence;

  bool operator==(const TimeWindow&) const = default;
};

}  // namespace darkwatch
