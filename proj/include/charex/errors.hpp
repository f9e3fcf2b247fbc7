#pragma once
#include <stdexcept>
#include <string>

namespace charex {

// Base class for all library errors.  Each error carries a stable machine
// code (used by the CLI for error JSON) plus a human-readable message.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

#define CHAREX_DEFINE_ERROR(NAME, CODE)                       \
  class NAME : public Error {                                 \
  public:                                                     \
    explicit NAME(const std::string& msg) : Error(CODE, msg) {} \
  }

CHAREX_DEFINE_ERROR(InvalidShape, "invalid_shape");
CHAREX_DEFINE_ERROR(ShapeTooTall, "shape_too_tall");
CHAREX_DEFINE_ERROR(InvalidMeasure, "invalid_measure");
CHAREX_DEFINE_ERROR(EmptyInput, "empty_input");
CHAREX_DEFINE_ERROR(ComplexityGuard, "complexity_guard");
CHAREX_DEFINE_ERROR(DegenerateVandermonde, "degenerate_vandermonde");
CHAREX_DEFINE_ERROR(DegenerateSpectrum, "degenerate_spectrum");
CHAREX_DEFINE_ERROR(RadiusViolation, "radius_violation");
CHAREX_DEFINE_ERROR(SpectralGapLost, "spectral_gap_lost");
CHAREX_DEFINE_ERROR(NonPositiveInput, "non_positive_input");
CHAREX_DEFINE_ERROR(SandwichViolation, "sandwich_violation");
CHAREX_DEFINE_ERROR(BoundViolation, "bound_violation");
CHAREX_DEFINE_ERROR(NotInL, "not_in_density_class");
CHAREX_DEFINE_ERROR(GridTooSmall, "grid_too_small");
CHAREX_DEFINE_ERROR(HypothesisViolation, "hypothesis_violation");
CHAREX_DEFINE_ERROR(TailNotCertified, "tail_not_certified");
CHAREX_DEFINE_ERROR(ConvergenceFailure, "convergence_failure");
CHAREX_DEFINE_ERROR(UsageError, "usage_error");
CHAREX_DEFINE_ERROR(IoError, "io_error");

#undef CHAREX_DEFINE_ERROR

}  // namespace charex
