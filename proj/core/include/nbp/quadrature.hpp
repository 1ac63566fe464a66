#pragma once

#include <functional>
#include <vector>

namespace nbp {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
};

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval. Bisects the
/// interval with the largest error estimate until the total estimate is
/// below max(abs_tol, rel_tol * |value|). Throws NumericError when the
/// interval budget runs out or the integrand is not finite.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& options = {});

/// Same, but starts from the pieces between consecutive `breakpoints`
/// (ascending, at least two). Use it when the integrand has features that a
/// single 15-point rule on the whole range could miss.
QuadratureResult integrate(const std::function<double(double)>& f,
                           const std::vector<double>& breakpoints,
                           const QuadratureOptions& options = {});

}  // namespace nbp
