#include "oca/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "oca/error.hpp"

namespace oca {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::gap_in_calendar: return "gap-in-calendar";
    case ErrorCode::missing_cell: return "missing-cell";
    case ErrorCode::non_positive_value: return "non-positive-value";
    case ErrorCode::duplicate_row: return "duplicate-row";
    case ErrorCode::base_year_absent: return "base-year-absent";
    case ErrorCode::too_short: return "too-short";
    case ErrorCode::degenerate_regressor: return "degenerate-regressor";
    case ErrorCode::inconclusive_at_max_order: return "inconclusive-at-max-order";
    case ErrorCode::singular_moment_matrix: return "singular-moment-matrix";
    case ErrorCode::rank_deficient_regressors: return "rank-deficient-regressors";
    case ErrorCode::no_admissible_lag: return "no-admissible-lag";
    case ErrorCode::h_too_small: return "h-too-small";
    case ErrorCode::unstable_model: return "unstable-model";
    case ErrorCode::sigma_not_positive_definite: return "sigma-not-positive-definite";
    case ErrorCode::zero_long_run: return "zero-long-run";
    case ErrorCode::insufficient_overlap: return "insufficient-overlap";
    case ErrorCode::zero_variance_series: return "zero-variance-series";
    case ErrorCode::missing_weight_year: return "missing-weight-year";
    case ErrorCode::weight_degenerate: return "weight-degenerate";
    case ErrorCode::weight_sum_out_of_tolerance: return "weight-sum-out-of-tolerance";
    case ErrorCode::date_out_of_range: return "date-out-of-range";
    case ErrorCode::zero_base: return "zero-base";
    case ErrorCode::zero_full_group_dispersion: return "zero-full-group-dispersion";
    case ErrorCode::group_too_small: return "group-too-small";
    case ErrorCode::unstable_dgp: return "unstable-dgp";
    case ErrorCode::invalid_dgp: return "invalid-dgp";
    case ErrorCode::calendar_mismatch: return "calendar-mismatch";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

YearMonth YearMonth::parse(std::string_view text) {
  auto fail = [&] { throw Error(ErrorCode::parse_error, "bad date '" + std::string(text) + "', expected YYYY-MM"); };
  if (text.size() != 7 || text[4] != '-') fail();
  int y = 0, m = 0;
  auto r1 = std::from_chars(text.data(), text.data() + 4, y);
  auto r2 = std::from_chars(text.data() + 5, text.data() + 7, m);
  if (r1.ec != std::errc{} || r1.ptr != text.data() + 4) fail();
  if (r2.ec != std::errc{} || r2.ptr != text.data() + 7) fail();
  if (m < 1 || m > 12) fail();
  return {y, m};
}

std::string YearMonth::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

Calendar make_calendar(YearMonth start, std::size_t count) {
  Calendar cal;
  cal.reserve(count);
  for (std::size_t i = 0; i < count; ++i) cal.push_back(start.plus(static_cast<int>(i)));
  return cal;
}

long calendar_position(const Calendar& cal, YearMonth ym) {
  if (cal.empty()) return -1;
  long pos = ym.index() - cal.front().index();
  if (pos < 0 || pos >= static_cast<long>(cal.size())) return -1;
  return pos;
}

}  // namespace oca
