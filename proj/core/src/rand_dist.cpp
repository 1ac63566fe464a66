#include "nbp/rand_dist.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nbp/errors.hpp"
#include "nbp/specfun.hpp"

namespace nbp {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x4e425031u};
  engine_.seed(seq);
}

double RngStream::uniform() {
  // 53 random mantissa bits, shifted off zero.
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::gamma(double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_) / rate;
}

RngStream RngStream::substream(std::uint64_t index) const {
  // Mix the parent identity into a fresh seed; splitmix64 finalizer.
  std::uint64_t z = seed_ ^ (stream_ * 0x9e3779b97f4a7c15ULL) ^ (index + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return RngStream(z, index);
}

void validate(const GigParams& p) {
  const bool ok = std::isfinite(p.chi) && std::isfinite(p.psi) && std::isfinite(p.order) &&
                  p.chi >= 0.0 && p.psi > 0.0 && (p.chi > 0.0 || p.order > 0.0);
  if (!ok) {
    throw DomainError("invalid GIG parameters (chi=" + std::to_string(p.chi) +
                      ", psi=" + std::to_string(p.psi) + ", order=" + std::to_string(p.order) +
                      ")");
  }
}

namespace {

// Samplers for the standardized density x^(lambda-1) exp(-omega/2 (x + 1/x)),
// lambda >= 0, omega > 0.

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms with mode shift (Dagpunar; Lehner).
double rou_shift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Roots of the cubic giving the bounding rectangle, via Cardano.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;

  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + (uplus - uminus) * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Ratio-of-uniforms without shift (Dagpunar; Lehner).
double rou_noshift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Rejection from a three-piece hat; covers 0 <= lambda < 1 with small omega
// where the density is not T-concave (Hörmann-Leydold).
double constant_hat(double lambda, double omega, RngStream& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double area[3];
  area[0] = k0 * x0;

  double k1 = 0.0;
  double k2 = 0.0;
  if (x0 >= 2.0 / omega) {
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                            : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];

  for (;;) {
    double v = total * rng.uniform();
    double x = 0.0;
    double hx = 0.0;
    if (v <= area[0]) {
      x = x0 * v / area[0];
      hx = k0;
    } else {
      v -= area[0];
      if (v <= area[1]) {
        if (lambda == 0.0) {
          x = omega * std::exp(std::exp(omega) * v);
          hx = k1 / x;
        } else {
          x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
          hx = k1 * std::pow(x, lambda - 1.0);
        }
      } else {
        v -= area[1];
        const double lo = std::max(x0, 2.0 / omega);
        x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
        hx = k2 * std::exp(-omega / 2.0 * x);
      }
    }
    const double u = hx * rng.uniform();
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

// Gamma(lambda, omega/2) proposal accepted with probability exp(-omega/(2x)).
// Exact for any lambda > 0; acceptance is near one once lambda >= 1 and
// omega is small, which is where the cubic in rou_shift loses precision.
double gamma_rejection(double lambda, double omega, RngStream& rng) {
  for (;;) {
    const double x = rng.gamma(lambda, 0.5 * omega);
    if (x > 0.0 && rng.uniform() <= std::exp(-0.5 * omega / x)) return x;
  }
}

double standard_gig(double lambda, double omega, RngStream& rng) {
  if (lambda >= 1.0 && omega < 1e-6) return gamma_rejection(lambda, omega, rng);
  if (lambda > 2.0 || omega > 3.0) return rou_shift(lambda, omega, rng);
  if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return rou_noshift(lambda, omega, rng);
  return constant_hat(lambda, omega, rng);
}

double clamp_positive(double x) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = std::numeric_limits<double>::max();
  return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace

double sample_gig(GigParams params, RngStream& rng) {
  if (params.order <= 0.0 && params.chi >= 0.0 && params.chi < kGigChiFloor) {
    params.chi = kGigChiFloor;
  }
  validate(params);
  if (params.chi == 0.0) return clamp_positive(rng.gamma(params.order, 0.5 * params.psi));

  const double lambda = std::abs(params.order);
  const double omega = std::sqrt(params.chi * params.psi);
  const double alpha = std::sqrt(params.chi / params.psi);
  if (!(omega > 0.0)) {
    // chi * psi underflowed; the chi/x term is immaterial at this scale.
    if (params.order > 0.0) return clamp_positive(rng.gamma(params.order, 0.5 * params.psi));
    throw NumericError("sample_gig: omega underflow with non-positive order");
  }
  const double x = standard_gig(lambda, omega, rng);
  // Negative order: X ~ GIG(chi, psi, -l)  <=>  1/X ~ GIG(psi, chi, l).
  return clamp_positive(params.order < 0.0 ? alpha / x : alpha * x);
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    throw DomainError("sample_inverse_gamma: shape and scale must be positive and finite");
  }
  const double g = rng.gamma(shape, 1.0);
  return clamp_positive(scale / g);
}

GigMoments gig_expectations(const GigParams& p) {
  if (!(p.chi > 0.0)) throw DomainError("gig_expectations: chi must be positive");
  validate(p);
  const double omega = std::sqrt(p.chi * p.psi);
  const double log_alpha = 0.5 * (std::log(p.chi) - std::log(p.psi));
  const double lk = specfun::log_bessel_k(p.order, omega);
  GigMoments m{};
  m.mean = std::exp(log_alpha + specfun::log_bessel_k(p.order + 1.0, omega) - lk);
  m.inverse_mean = std::exp(-log_alpha + specfun::log_bessel_k(p.order - 1.0, omega) - lk);
  m.log_mean = log_alpha + specfun::dlog_bessel_k_dorder(p.order, omega);
  return m;
}

InverseGammaMoments inverse_gamma_expectations(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    throw DomainError("inverse_gamma_expectations: shape and scale must be positive and finite");
  }
  return {shape / scale, std::log(scale) - specfun::digamma(shape)};
}

}  // namespace nbp
