#pragma once

#include <stdexcept>
#include <string>

namespace vartherm {

enum class ErrorKind {
  dimension_mismatch,
  domain,              // EOS evaluated outside V > 0, N > 0, T > 0, p > 0
  inadmissible_state,  // non-positive temperature
  negative_moles,
  singular_mass_matrix,
  geometry,            // piston left the cylinder
  validation,          // model validation (PSD checks, Lavoisier, ...)
  step_rejected,
  stiffness,
  newton_failure,
  unsupported,
  config,
  io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes the cases.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// States an adaptive stepper may recover from by shrinking the step.
  bool recoverable_by_step_reduction() const noexcept {
    return kind_ == ErrorKind::domain || kind_ == ErrorKind::inadmissible_state ||
           kind_ == ErrorKind::negative_moles || kind_ == ErrorKind::newton_failure ||
           kind_ == ErrorKind::step_rejected;
  }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace vartherm
