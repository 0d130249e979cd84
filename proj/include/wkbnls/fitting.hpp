#pragma once

// Least-squares power-law fits, log y = intercept + slope log x.

#include <span>

namespace wkbnls {

struct LogLogFit {
  double slope;
  double intercept;
  double r_squared;
  std::size_t points;
};

// Requires at least two strictly positive (x, y) pairs.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace wkbnls
