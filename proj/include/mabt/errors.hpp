#pragma once

#include <stdexcept>
#include <string>

namespace mabt {

// Error codes exposed verbatim in CLI error objects.
enum class errc {
  rank_deficient,
  dimension_mismatch,
  invalid_size,
  rank_retry_exhausted,
  leverage_one,
  singular_q,
  coefficient_not_in_model,
  zero_variance,
  parse_error,
  missing_column,
  non_numeric,
  non_finite,
  degenerate_fit,
  sigma_not_pd,
  invalid_config,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}

  errc code() const { return code_; }
  const char* code_name() const { return errc_name(code_); }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace mabt
