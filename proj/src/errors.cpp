#include "wkbnls/errors.hpp"

#include <sstream>

namespace wkbnls {

namespace {

std::string caustic_message(double t, double horizon) {
  std::ostringstream os;
  os << "requested time " << t << " is at or beyond the caustic horizon " << horizon;
  return os.str();
}

std::string non_finite_message(const std::string& where, double t) {
  std::ostringstream os;
  os << where << ": non-finite state at t = " << t;
  return os.str();
}

}  // namespace

CausticCrossed::CausticCrossed(double t, double horizon)
    : std::runtime_error(caustic_message(t, horizon)), time_(t), horizon_(horizon) {}

NonFiniteState::NonFiniteState(const std::string& where, double t)
    : std::runtime_error(non_finite_message(where, t)), time_(t) {}

InversionFailure::InversionFailure(const std::string& msg, double worst_residual)
    : std::runtime_error(msg), worst_residual_(worst_residual) {}

}  // namespace wkbnls
