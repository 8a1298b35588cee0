#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geolab {

enum class ErrorCode {
  precondition,
  non_admissible_psi,
  interior_too_thin,
  incompatible_mass,
  singular_system,
  no_convergence,
  positivity_loss,
  non_convex_input,
  negative_density,
  family_mismatch,
  not_a_solution,
  invalid_sequence,
  unsupported_scheme,
  config,
  io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }
  // Message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::precondition, what);
}

}  // namespace geolab
