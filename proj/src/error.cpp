#include "vartherm/error.hpp"

namespace vartherm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::domain: return "domain";
    case ErrorKind::inadmissible_state: return "inadmissible_state";
    case ErrorKind::negative_moles: return "negative_moles";
    case ErrorKind::singular_mass_matrix: return "singular_mass_matrix";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::validation: return "validation";
    case ErrorKind::step_rejected: return "step_rejected";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::newton_failure: return "newton_failure";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace vartherm
