#pragma once

#include <stdexcept>
#include <string>

namespace lqrlr {

enum class Errc {
  invalid_argument,  // bad dimensions, bad config, violated preconditions
  parse,             // file/schema violations
  io,                // filesystem failures
  eigen_failure,     // eigenvalue/SVD iteration did not converge
  unstable,          // closed loop not asymptotically stable
  numerical,         // singular solve, residual blow-up
  non_stabilizable,  // Hamiltonian on imaginary axis / singular subspace basis
  inner_stall,       // Anderson-Moore backtracking exhausted
  calibration,       // no stabilizing design found during gamma calibration
};

// Short machine-parsable tag, used verbatim by the CLI error lines.
inline const char* errc_tag(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "E_ARGS";
    case Errc::parse: return "E_PARSE";
    case Errc::io: return "E_IO";
    case Errc::eigen_failure: return "E_EIGEN";
    case Errc::unstable: return "E_UNSTABLE";
    case Errc::numerical: return "E_NUMERICAL";
    case Errc::non_stabilizable: return "E_NONSTABILIZABLE";
    case Errc::inner_stall: return "E_INNER_STALL";
    case Errc::calibration: return "E_CALIBRATION";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }
  const char* tag() const { return errc_tag(code_); }

 private:
  Errc code_;
};

// Raised when a closed loop fails the stability test; carries the offending
// spectral abscissa so callers can report how far from F the gain landed.
class UnstableError : public Error {
 public:
  UnstableError(const std::string& msg, double abscissa)
      : Error(Errc::unstable, msg), abscissa_(abscissa) {}
  double abscissa() const { return abscissa_; }

 private:
  double abscissa_;
};

}  // namespace lqrlr
