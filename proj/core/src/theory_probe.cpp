#include "nbp/theory_probe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "nbp/errors.hpp"
#include "nbp/quadrature.hpp"
#include "nbp/specfun.hpp"

namespace nbp {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double softplus(double t) { return t > 35.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double log_beta_fn(double a, double b) {
  return specfun::log_gamma(a) + specfun::log_gamma(b) - specfun::log_gamma(a + b);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

// log of int_lo^hi exp(log_f(t)) dt. The range is cut into pieces no wider
// than 2 (plus the given split points) and the integrand is rescaled by its
// largest value on that grid before integrating.
double log_integral(const std::function<double(double)>& log_f, double lo, double hi,
                    const std::vector<double>& splits) {
  const int pieces = std::clamp(static_cast<int>(std::ceil((hi - lo) / 2.0)), 8, 400);
  std::vector<double> pts;
  for (int i = 0; i <= pieces; ++i) pts.push_back(lo + (hi - lo) * i / pieces);
  for (double s : splits) {
    if (s > lo && s < hi) pts.push_back(s);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](double u, double v) { return v - u < 1e-12; }),
            pts.end());

  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    shift = std::max(shift, log_f(pts[i]));
    if (i + 1 < pts.size()) shift = std::max(shift, log_f(0.5 * (pts[i] + pts[i + 1])));
  }
  if (!std::isfinite(shift)) throw NumericError("log_integral: integrand vanishes on the grid");

  QuadratureOptions opt;
  opt.rel_tol = 1e-11;
  const QuadratureResult r = integrate([&](double t) { return std::exp(log_f(t) - shift); }, pts, opt);
  if (!(r.value > 0.0)) return -std::numeric_limits<double>::infinity();
  return shift + std::log(r.value);
}

// Standardized marginal g(x) with sigma = 1.
double standard_marginal(double x, double a, double b) {
  const double x2 = x * x;
  const auto log_f = [=](double t) {
    return (a - 0.5) * t - 0.5 * x2 * std::exp(-t) - (a + b) * softplus(t);
  };
  double lo;
  std::vector<double> splits;
  if (x2 > 0.0) {
    lo = std::log(x2) - std::log(1600.0);
    splits.push_back(std::log(x2));
  } else {
    lo = -60.0 / (a - 0.5) - 10.0;
  }
  const double hi = std::max(x2 > 0.0 ? std::log(x2) : 0.0, std::log(1.0 + a)) + 10.0 + 80.0 / (b + 0.5);
  const double log_int = log_integral(log_f, lo, hi, splits);
  return std::exp(log_int - kLogSqrt2Pi - log_beta_fn(a, b));
}

}  // namespace

double marginal_density(double beta, double a, double b, double sigma2) {
  require_positive(a, "a");
  require_positive(b, "b");
  require_positive(sigma2, "sigma2");
  if (!std::isfinite(beta)) throw DomainError("beta must be finite");
  if (beta == 0.0 && a <= 0.5) {
    throw DomainError("marginal density is infinite at zero when a <= 1/2");
  }
  const double sigma = std::sqrt(sigma2);
  return standard_marginal(std::abs(beta) / sigma, a, b) / sigma;
}

MarginalGrid marginal_grid(const std::vector<double>& betas, double a, double b, double sigma2) {
  MarginalGrid grid;
  grid.a = a;
  grid.b = b;
  grid.sigma2 = sigma2;
  grid.points.reserve(betas.size());
  for (double x : betas) grid.points.emplace_back(x, marginal_density(x, a, b, sigma2));
  return grid;
}

GammaRatioBounds lemma1_ratio(double a, double b) {
  require_positive(a, "a");
  require_positive(b, "b");
  GammaRatioBounds r;
  r.ratio = std::exp(-log_beta_fn(a, b));
  r.lower = a * b / (a + b);
  r.upper = a * std::exp2(a + b) * b / (a + b);
  r.holds = r.lower <= r.ratio && r.ratio <= r.upper;
  return r;
}

double beta_prime_cdf(double x, double a, double b) {
  require_positive(a, "a");
  require_positive(b, "b");
  if (std::isnan(x)) throw DomainError("beta_prime_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  // With u = x / (1 + x) and s = v^(1/a), I_u(a, b) = (1/a) int_0^(u^a) (1 - v^(1/a))^(b-1) dv / B(a, b).
  const double top = std::exp(a * (std::log(x) - std::log1p(x)));
  const auto f = [=](double v) { return std::pow(-std::expm1(std::log(v) / a), b - 1.0); };
  std::vector<double> pts;
  constexpr int kPieces = 16;
  for (int i = 0; i <= kPieces; ++i) pts.push_back(top * i / kPieces);
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  const QuadratureResult r = integrate(f, pts, opt);
  return std::min(1.0, r.value * std::exp(-std::log(a) - log_beta_fn(a, b)));
}

TailBound tail_mass_bound(double k, double a, double b) {
  require_positive(k, "k");
  require_positive(a, "a");
  if (!(b > 1.0) || !std::isfinite(b)) throw DomainError("tail_mass_bound requires b > 1");

  const double k2 = k * k;
  const double lo = std::log(k2) - std::log(1600.0);
  const double hi = std::max(std::log(k2), 0.0) + 10.0 + 60.0 / b;
  const std::vector<double> splits{std::log(k2)};
  const double lbeta = log_beta_fn(a, b);

  const auto log_tail = [=](double t) {
    const double z = k * std::exp(-0.5 * t) / std::sqrt(2.0);
    return a * t - (a + b) * softplus(t) + std::log(std::erfc(z));
  };
  const auto log_first = [=](double t) {
    return a * t - (a + b) * softplus(t) - 0.5 * k2 * std::exp(-t);
  };
  const double s = 0.5 * k2;
  const auto log_dominated = [=](double tau) {
    return tau - (a + 1.0) * softplus(tau) - s * std::exp(tau);
  };

  TailBound out;
  out.tail = std::exp(log_integral(log_tail, lo, hi, splits) - lbeta);
  out.first = 2.0 * std::exp(log_integral(log_first, lo, hi, splits) - lbeta);
  const double tau_hi = std::max(std::log(800.0 / s), 1.0);
  out.dominated = 2.0 * a * std::exp(log_integral(log_dominated, -60.0, tau_hi, {-std::log(s)}));
  out.bound = 4.0 * a / k2;
  constexpr double slack = 1.0 + 1e-9;
  out.holds = out.tail <= out.first * slack && out.first <= out.dominated * slack &&
              out.dominated <= out.bound * slack;
  return out;
}

bool stochastic_dominance_check(double a, double b, const std::vector<double>& grid) {
  require_positive(a, "a");
  if (!(b >= 1.0) || !std::isfinite(b)) throw DomainError("stochastic_dominance_check requires b >= 1");
  for (double x : grid) {
    if (!(x > 0.0)) throw DomainError("stochastic_dominance_check: grid must be positive");
  }
  for (double x : grid) {
    if (beta_prime_cdf(x, a, b) < beta_prime_cdf(x, a, 1.0) - 1e-12) return false;
  }
  return true;
}

int generalized_dimension(const Eigen::VectorXd& beta, double sigma, double delta) {
  require_positive(sigma, "sigma");
  require_positive(delta, "delta");
  int count = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (std::abs(beta[i] / sigma) > delta) ++count;
  }
  return count;
}

}  // namespace nbp
