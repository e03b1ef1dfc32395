#pragma once

#include <stdexcept>
#include <string>

namespace geoatt {

/// Error categories shared across the library. Each maps to one failure mode
/// of a public operation; CLI code translates them into exit diagnostics.
enum class Errc {
  not_orthogonal,
  negative_determinant,
  dimension_mismatch,
  no_convergence,
  step_rejected,
  domain_error,
  reality_error,
  singular_y,
  singular_system,
  not_an_equilibrium,
  inconsistent_parameters,
  rank_mismatch,
  config_error,
  internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace geoatt
