#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace oca {

// A calendar month. Monthly data only, so there is no day component.
struct YearMonth {
  int year = 0;
  int month = 1;  // 1..12

  constexpr auto operator<=>(const YearMonth&) const = default;

  // Months since year 0, used for arithmetic and gap detection.
  constexpr int index() const { return year * 12 + (month - 1); }
  static constexpr YearMonth from_index(int idx) {
    int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    return {y, idx - y * 12 + 1};
  }
  constexpr YearMonth plus(int months) const { return from_index(index() + months); }
  constexpr YearMonth next() const { return plus(1); }

  // Parses `YYYY-MM`; throws oca::Error(parse_error) otherwise.
  static YearMonth parse(std::string_view text);
  std::string str() const;
};

using Calendar = std::vector<YearMonth>;

// Contiguous monthly calendar of `count` months starting at `start`.
Calendar make_calendar(YearMonth start, std::size_t count);

// Position of `ym` in a contiguous calendar, or -1 when outside it.
long calendar_position(const Calendar& cal, YearMonth ym);

}  // namespace oca
