#include "nbp/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nbp/errors.hpp"

namespace nbp::specfun {
namespace {

void require_positive(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(who) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

// Taylor coefficients of 1/Gamma(z) about z = 0: 1/Gamma(z) = sum_k c[k] z^k.
constexpr std::array<double, 31> kRecipGammaTaylor = {
    0.0,
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
    1.7144063219273374334e-20,
};

// Temme's auxiliary gamma quantities for |mu| <= 1/2:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
//   gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
//   gampl = 1/Gamma(1+mu), gammi = 1/Gamma(1-mu)
struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

TemmeGammas temme_gammas(double mu) {
  const double mu2 = mu * mu;
  double odd = 0.0;   // sum over odd k of c[k] mu^(k-1)
  double even = 0.0;  // sum over even k of c[k] mu^(k-2)
  for (int k = static_cast<int>(kRecipGammaTaylor.size()) - 1; k >= 1; --k) {
    if (k % 2 == 1) {
      odd = odd * mu2 + kRecipGammaTaylor[k];
    } else {
      even = even * mu2 + kRecipGammaTaylor[k];
    }
  }
  TemmeGammas g{};
  g.gam1 = -even;
  g.gam2 = odd;
  // 1/Gamma(1+mu) = gam2 - mu*gam1, 1/Gamma(1-mu) = gam2 + mu*gam1.
  g.gampl = g.gam2 - mu * g.gam1;
  g.gammi = g.gam2 + mu * g.gam1;
  return g;
}

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// log K_mu(x) and K_{mu+1}(x)/K_mu(x) for |mu| <= 1/2.
struct BaseBessel {
  double log_k;
  double ratio;
};

BaseBessel bessel_k_base(double mu, double x) {
  constexpr double pi = std::numbers::pi;
  if (x < 2.0) {
    // Temme's series.
    const double x2 = 0.5 * x;
    const double pimu = pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    const double mu2 = mu * mu;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      const double di = static_cast<double>(i);
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= di - mu;
      q /= di + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - di * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw NumericError("log_bessel_k: Temme series did not converge");
    return {std::log(sum), sum1 * (2.0 / x) / sum};
  }

  // Steed's continued fraction CF2 (scaled by e^x).
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i <= kMaxIter; ++i) {
    const double di = static_cast<double>(i);
    a -= 2.0 * (di - 1.0);
    c = -a * c / di;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  if (i > kMaxIter) throw NumericError("log_bessel_k: continued fraction did not converge");
  h *= a1;
  const double log_k = 0.5 * std::log(pi / (2.0 * x)) - x - std::log(s);
  return {log_k, (mu + x + 0.5 - h) / x};
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double digamma(double x) {
  require_positive(x, "digamma");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series in 1/x^2 (Bernoulli numbers B_2k / 2k).
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return result + std::log(x) - 0.5 * inv - tail;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv * (1.0 + inv * (0.5 + inv * (1.0 / 6.0 -
                                       inv2 * (1.0 / 30.0 -
                                               inv2 * (1.0 / 42.0 -
                                                       inv2 * (1.0 / 30.0 -
                                                               inv2 * (5.0 / 66.0 -
                                                                       inv2 * (691.0 / 2730.0 -
                                                                               inv2 * 7.0 / 6.0))))))));
  return result + tail;
}

double inverse_digamma(double y) {
  if (!std::isfinite(y)) throw DomainError("inverse_digamma: argument must be finite");
  double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + kEulerGamma);
  const double scale = std::max(1.0, std::abs(y));
  for (int iter = 0; iter < 100; ++iter) {
    const double residual = digamma(x) - y;
    if (std::abs(residual) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) return x;
    double next = x - residual / trigamma(x);
    // psi is concave and increasing: iterates started left of the root stay
    // left of it, iterates from the right can jump past zero.
    if (!(next > 0.0)) next = 0.5 * x;
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) {
      x = next;
      break;
    }
    x = next;
  }
  const double residual = std::abs(digamma(x) - y);
  if (residual > 1e-10 * scale) {
    throw NumericError("inverse_digamma: Newton iteration did not converge for y = " +
                       std::to_string(y));
  }
  return x;
}

double log_bessel_k(double order, double x) {
  if (!(x > 0.0) || std::isnan(x)) {
    throw DomainError("log_bessel_k: argument must be positive, got " + std::to_string(x));
  }
  if (!std::isfinite(order)) throw DomainError("log_bessel_k: order must be finite");
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  const double nu = std::abs(order);
  const double nl = std::floor(nu + 0.5);
  const double mu = nu - nl;
  const BaseBessel base = bessel_k_base(mu, x);

  // Forward recurrence on ratios r_k = K_{mu+k+1} / K_{mu+k}; stable for K.
  double log_k = base.log_k;
  double ratio = base.ratio;
  const auto steps = static_cast<long>(nl);
  for (long k = 1; k <= steps; ++k) {
    log_k += std::log(ratio);
    ratio = 2.0 * (mu + static_cast<double>(k)) / x + 1.0 / ratio;
  }
  return log_k;
}

double dlog_bessel_k_dorder(double order, double x) {
  if (!(x > 0.0) || std::isnan(x)) {
    throw DomainError("dlog_bessel_k_dorder: argument must be positive");
  }
  if (order == 0.0) return 0.0;
  const double h = std::max(1e-5, 1e-5 * std::abs(order));
  return (log_bessel_k(order + h, x) - log_bessel_k(order - h, x)) / (2.0 * h);
}

}  // namespace nbp::specfun
