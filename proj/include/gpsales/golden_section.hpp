#pragma once

namespace gpsales::detail {

// Derivative-free 1-D maximization on [lo, hi]. Returns the best evaluated
// interior point once the bracket has shrunk below tol.
template <typename F>
double golden_section_maximize(F&& f, double lo, double hi, double tol, int max_iter = 200) {
  constexpr double invphi = 0.61803398874989484820;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace gpsales::detail
