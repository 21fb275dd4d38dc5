#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace cgl::testsupport {

// Central finite difference of f at *x.
inline double central_diff(double* x, const std::function<double()>& f, double h) {
  const double x0 = *x;
  *x = x0 + h;
  const double fp = f();
  *x = x0 - h;
  const double fm = f();
  *x = x0;
  return (fp - fm) / (2.0 * h);
}

// Near-zero gradients make relative error meaningless, so an absolute floor
// backs up the relative criterion.
inline bool grad_close(double analytic, double numeric, double rel_tol = 1e-4,
                       double abs_floor = 1e-7) {
  const double diff = std::fabs(analytic - numeric);
  if (diff < abs_floor) return true;
  const double scale = std::fmax(std::fabs(analytic), std::fabs(numeric));
  return diff <= rel_tol * scale;
}

}  // namespace cgl::testsupport
