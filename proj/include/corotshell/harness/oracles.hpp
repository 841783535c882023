#pragma once

#include <cmath>
#include <numbers>

namespace corotshell {

/// Center deflection of a simply supported a-by-b Kirchhoff plate under
/// uniform load q (Navier double sine series over odd m, n <= terms).
inline double navier_plate_deflection(double q, double a, double b, double flexural, int terms = 99) {
  const double pi = std::numbers::pi;
  double sum = 0.0;
  for (int m = 1; m <= terms; m += 2) {
    for (int n = 1; n <= terms; n += 2) {
      const double sign = (((m + n) / 2 - 1) % 2 == 0) ? 1.0 : -1.0;  // sin(m pi/2) sin(n pi/2)
      const double k = (m / a) * (m / a) + (n / b) * (n / b);
      sum += sign / (m * n * k * k);
    }
  }
  return 16.0 * q / (std::pow(pi, 6) * flexural) * sum;
}

/// Tip deflection of a clamped strip of length L under uniform load q per area.
inline double cantilever_deflection(double q, double length, double flexural) {
  return q * std::pow(length, 4) / (8.0 * flexural);
}

}  // namespace corotshell
