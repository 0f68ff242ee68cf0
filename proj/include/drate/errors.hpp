#pragma once

#include <stdexcept>
#include <string>

namespace drate {

// Failure conditions surfaced by the library. Every throw site uses one of
// these codes so callers can branch on the condition instead of matching
// message text.
enum class errc {
  all_treated_or_none_treated,
  rank_deficient,
  dimension_overflow,
  length_mismatch,
  p_out_of_range,
  not_standardized,
  zero_denominator_mean,
  unknown_family,
  dimension_mismatch,
  all_replications_failed,
  regime_mismatch,
  parse_error,
  invalid_treatment_value,
  missing_column,
  non_finite_value,
  degenerate_column,
  no_eligible_records,
  empty_group,
  domain_error,
  zero_residual_variance,
  non_finite,
  invalid_argument,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::all_treated_or_none_treated: return "AllTreatedOrNoneTreated";
    case errc::rank_deficient: return "RankDeficient";
    case errc::dimension_overflow: return "DimensionOverflow";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::p_out_of_range: return "POutOfRange";
    case errc::not_standardized: return "NotStandardized";
    case errc::zero_denominator_mean: return "ZeroDenominatorMean";
    case errc::unknown_family: return "UnknownFamily";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::all_replications_failed: return "AllReplicationsFailed";
    case errc::regime_mismatch: return "RegimeMismatch";
    case errc::parse_error: return "ParseError";
    case errc::invalid_treatment_value: return "InvalidTreatmentValue";
    case errc::missing_column: return "MissingColumn";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::degenerate_column: return "DegenerateColumn";
    case errc::no_eligible_records: return "NoEligibleRecords";
    case errc::empty_group: return "EmptyGroup";
    case errc::domain_error: return "DomainError";
    case errc::zero_residual_variance: return "ZeroResidualVariance";
    case errc::non_finite: return "NonFinite";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw error(code, message);
}

}  // namespace drate
