#pragma once

#include <stdexcept>
#include <string>

namespace structest {

// Error categories. The C API maps these onto status codes and the CLI maps
// status codes onto exit codes, so additions here need matching entries in
// capi.cpp.
enum class errc {
  invalid_argument,
  parse_error,
  missing_column,
  non_numeric_indicator,
  empty_cell,
  zero_denominator,
  degenerate_initialization,
  all_means_zero,
  insufficient_groups,
  zero_full_variance,
  not_converged,
  stratum_too_small,
  invalid_spec,
  unsupported_scenario,
  io_error,
};

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void throw_error(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace structest
