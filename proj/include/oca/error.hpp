#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oca {

// Failure categories surfaced by the library. Every thrown oca::Error carries
// exactly one of these so callers (and tests) can branch on the kind rather
// than parsing messages.
enum class ErrorCode {
  parse_error,
  gap_in_calendar,
  missing_cell,
  non_positive_value,
  duplicate_row,
  base_year_absent,
  too_short,
  degenerate_regressor,
  inconclusive_at_max_order,
  singular_moment_matrix,
  rank_deficient_regressors,
  no_admissible_lag,
  h_too_small,
  unstable_model,
  sigma_not_positive_definite,
  zero_long_run,
  insufficient_overlap,
  zero_variance_series,
  missing_weight_year,
  weight_degenerate,
  weight_sum_out_of_tolerance,
  date_out_of_range,
  zero_base,
  zero_full_group_dispersion,
  group_too_small,
  unstable_dgp,
  invalid_dgp,
  calendar_mismatch,
  invalid_argument,
  invalid_config,
  io_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

  // Same code, message prefixed with where it happened.
  Error in(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace oca
