#pragma once

// Scalar special functions used by the EM M-step, GIG moments and the ELBO.
// All functions are pure and thread-safe.

namespace nbp::specfun {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Digamma psi(x) for x > 0. Throws DomainError otherwise.
double digamma(double x);

/// Trigamma psi'(x) for x > 0.
double trigamma(double x);

/// Solves digamma(x) = y for x > 0 by Newton iteration.
/// Throws DomainError for non-finite y, NumericError if Newton stalls.
double inverse_digamma(double y);

/// log K_nu(x), the modified Bessel function of the second kind, for any real
/// order and x > 0. Evaluated without forming K itself, so it stays finite
/// where K under- or overflows.
double log_bessel_k(double order, double x);

/// d/d(nu) log K_nu(x) by central difference, step max(1e-5, 1e-5 |nu|).
double dlog_bessel_k_dorder(double order, double x);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

}  // namespace nbp::specfun
