#pragma once

#include <stdexcept>
#include <string>

namespace wkbnls {

// Evaluation requested at or beyond the first caustic of a ray bundle.
class CausticCrossed : public std::runtime_error {
 public:
  CausticCrossed(double t, double horizon);
  double time() const { return time_; }
  double horizon() const { return horizon_; }

 private:
  double time_;
  double horizon_;
};

// NaN/Inf produced while integrating; carries the offending time.
class NonFiniteState : public std::runtime_error {
 public:
  NonFiniteState(const std::string& where, double t);
  double time() const { return time_; }

 private:
  double time_;
};

class InversionFailure : public std::runtime_error {
 public:
  InversionFailure(const std::string& msg, double worst_residual);
  double worst_residual() const { return worst_residual_; }

 private:
  double worst_residual_;
};

}  // namespace wkbnls
