#pragma once

// Test-side oracles and statistics helpers. Nothing here calls into the code
// under test except RngStream for reproducible inputs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "nbp/rand_dist.hpp"

namespace nbp::testing {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

inline double ks_critical_two_sample_1pct(std::size_t n, std::size_t m) {
  return 1.628 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

// One-sample statistic against a continuous CDF.
inline double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

inline double ks_critical_one_sample_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

inline Eigen::MatrixXd random_normal_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd random_normal_vector(Eigen::Index n, RngStream& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

// Integral of exp(h(t)) g(t) over the real line, h concave with mode t0,
// computed relative to exp(h(t0)). Returns the integral divided by exp(h(t0)).
inline double integrate_peaked(const std::function<double(double)>& h, double t0,
                               const std::function<double(double)>& g) {
  using boost::math::quadrature::gauss_kronrod;
  const double h0 = h(t0);
  auto f = [&](double t) {
    const double e = h(t) - h0;
    return e > -745.0 ? std::exp(e) * g(t) : 0.0;
  };
  double total = 0.0;
  // Finite pieces around the mode, then the two tails on infinite ranges.
  const double step = 2.0;
  double lo = t0 - 20.0 * step;
  for (int k = 0; k < 40; ++k) {
    total += gauss_kronrod<double, 61>::integrate(f, lo + k * step, lo + (k + 1) * step, 15, 1e-14);
  }
  total += gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(), lo, 15, 1e-14);
  total += gauss_kronrod<double, 61>::integrate(f, lo + 40 * step, std::numeric_limits<double>::infinity(), 15,
                                                1e-14);
  return total;
}

struct GigOracle {
  double mean, inverse_mean, log_mean;
};

// GIG moments by quadrature over t = log x.
inline GigOracle gig_moment_oracle(double chi, double psi, double order) {
  auto h = [=](double t) { return order * t - 0.5 * (chi * std::exp(-t) + psi * std::exp(t)); };
  const double t0 = std::log((order + std::sqrt(order * order + chi * psi)) / psi);
  const double z = integrate_peaked(h, t0, [](double) { return 1.0; });
  const double m = integrate_peaked(h, t0, [](double t) { return std::exp(t); });
  const double im = integrate_peaked(h, t0, [](double t) { return std::exp(-t); });
  const double lm = integrate_peaked(h, t0, [](double t) { return t; });
  return {m / z, im / z, lm / z};
}

// log of the GIG normalizing constant: log int x^(p-1) exp(-(chi/x + psi x)/2) dx
// = log 2 + (p/2) log(chi/psi) + log K_p(sqrt(chi psi)).
inline double gig_log_normalizer(double chi, double psi, double order) {
  return std::log(2.0) + 0.5 * order * std::log(chi / psi) +
         std::log(boost::math::cyl_bessel_k(order, std::sqrt(chi * psi)));
}

// Direct Cholesky sampler for N(A^{-1} X'y, sigma2 A^{-1}), A = X'X + diag(1/d).
inline Eigen::VectorXd oracle_beta_draw(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& d, double sigma2, RngStream& rng) {
  Eigen::MatrixXd a = x.transpose() * x;
  a.diagonal() += d.cwiseInverse();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  const Eigen::VectorXd mean = llt.solve(x.transpose() * y);
  const Eigen::VectorXd z = random_normal_vector(x.cols(), rng);
  // A = L L', so L'^{-1} z has covariance A^{-1}.
  return mean + std::sqrt(sigma2) * llt.matrixU().solve(z);
}

}  // namespace nbp::testing
