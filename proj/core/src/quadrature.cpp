#include "nbp/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "nbp/errors.hpp"

namespace nbp {
namespace {

constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGauss[4] = {0.129484966168869693270611432679082,
                              0.279705391489276667901467771423780,
                              0.381830050505118944950369775488975,
                              0.417959183673469387755102040816327};

struct Piece {
  double lo, hi, value, error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

Piece gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = kKronrod[7] * fc;
  double gauss = kGauss[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrod[j] * sum;
    if (j % 2 == 1) gauss += kGauss[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) throw NumericError("integrate: integrand is not finite");
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& options) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("integrate: limits must be finite");
  if (lo == hi) return {};
  if (lo > hi) {
    QuadratureResult r = integrate(f, hi, lo, options);
    r.value = -r.value;
    return r;
  }
  return integrate(f, std::vector<double>{lo, hi}, options);
}

QuadratureResult integrate(const std::function<double(double)>& f,
                           const std::vector<double>& breakpoints,
                           const QuadratureOptions& options) {
  if (breakpoints.size() < 2) throw DomainError("integrate: need at least two breakpoints");
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!std::isfinite(breakpoints[i])) throw DomainError("integrate: limits must be finite");
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) {
      throw DomainError("integrate: breakpoints must be strictly increasing");
    }
  }

  std::priority_queue<Piece> heap;
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    const Piece piece = gauss_kronrod(f, breakpoints[i - 1], breakpoints[i]);
    value += piece.value;
    error += piece.error;
    heap.push(piece);
    ++intervals;
  }

  while (error > std::max(options.abs_tol, options.rel_tol * std::abs(value))) {
    if (intervals >= options.max_intervals + static_cast<int>(breakpoints.size())) {
      throw NumericError("integrate: no convergence within the interval budget");
    }
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw NumericError("integrate: interval too small to bisect");
    }
    const Piece left = gauss_kronrod(f, worst.lo, mid);
    const Piece right = gauss_kronrod(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }

  // Re-sum to drop the rounding accumulated by the running updates.
  double total = 0.0, total_error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_error += heap.top().error;
    heap.pop();
  }
  return {total, total_error, intervals};
}

}  // namespace nbp
