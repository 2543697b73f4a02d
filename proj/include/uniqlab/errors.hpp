#pragma once
#include <stdexcept>
#include <string>

namespace uniqlab {

// Every failure the library raises deliberately carries one of these tags so
// the CLI can map it to an exit code (config/input problems -> 2, numerical
// failures -> 3) and tests can assert the precise failure mode.
enum class ErrorCode {
  config_parse,
  unknown_key,
  expr_parse,
  dimension_mismatch,
  non_positive_resolution,
  box_invalid,
  empty_interior,
  mask_shape_mismatch,
  non_finite_coefficient,
  not_positive_definite,
  origin_outside,
  empty_collar,
  negative_input,
  insufficient_data,
  kappa_zero,
  bad_parameter,
  solver_failure,
  maximum_principle_violated,
  positivity_lost,
  io_failure,
};

struct Error : std::runtime_error {
  ErrorCode code;
  Error(ErrorCode c, const std::string& what) : std::runtime_error(what), code(c) {}
};

// config/input errors vs numerical errors, for CLI exit codes
inline bool is_config_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::solver_failure:
    case ErrorCode::maximum_principle_violated:
    case ErrorCode::positivity_lost:
      return false;
    default:
      return true;
  }
}

[[noreturn]] inline void fail(ErrorCode c, const std::string& what) { throw Error(c, what); }

} // namespace uniqlab
