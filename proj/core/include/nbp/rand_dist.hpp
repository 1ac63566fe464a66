#pragma once

#include <cstdint>
#include <random>

namespace nbp {

/// Seedable random stream. Equal (seed, stream) pairs give identical
/// sequences; different stream indices are seeded through seed_seq and are
/// treated as independent. Single owner, not thread-safe.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate);
  std::uint64_t next_u64() { return engine_(); }

  /// Child stream derived deterministically from this stream's identity.
  RngStream substream(std::uint64_t index) const;

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// GIG(chi, psi, order) with density proportional to
///   x^(order - 1) exp(-(chi / x + psi * x) / 2),  x > 0.
struct GigParams {
  double chi = 0.0;
  double psi = 1.0;
  double order = 1.0;
};

/// Floor applied to chi when order <= 0 so the density stays proper.
inline constexpr double kGigChiFloor = 1e-300;

/// Throws DomainError unless chi >= 0, psi > 0, finite order and
/// (chi > 0 or order > 0).
void validate(const GigParams& params);

/// Exact GIG draw (Hörmann-Leydold ratio-of-uniforms family). chi == 0 with
/// order > 0 reduces to Gamma(order, rate psi / 2).
double sample_gig(GigParams params, RngStream& rng);

/// Inverse gamma draw, density proportional to x^(-shape-1) exp(-scale / x).
double sample_inverse_gamma(double shape, double scale, RngStream& rng);

struct GigMoments {
  double mean;
  double inverse_mean;
  double log_mean;
};

/// E[X], E[1/X], E[log X] under GIG(chi, psi, order); requires chi > 0.
GigMoments gig_expectations(const GigParams& params);

struct InverseGammaMoments {
  double inverse_mean;
  double log_mean;
};

/// E[1/X] = shape / scale and E[log X] = log(scale) - digamma(shape).
InverseGammaMoments inverse_gamma_expectations(double shape, double scale);

}  // namespace nbp
