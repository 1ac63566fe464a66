#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nbp {

/// Marginal prior density of beta under the normal-beta prime hierarchy,
/// beta | omega2 ~ N(0, sigma2 omega2), omega2 ~ BetaPrime(a, b), evaluated
/// by quadrature over log omega2. Throws DomainError at beta = 0 when a <= 1/2
/// (the density has a pole there).
double marginal_density(double beta, double a, double b, double sigma2);

struct MarginalGrid {
  std::vector<std::pair<double, double>> points;  // (beta, density)
  double a = 0.0;
  double b = 0.0;
  double sigma2 = 0.0;
};

MarginalGrid marginal_grid(const std::vector<double>& betas, double a, double b, double sigma2);

struct GammaRatioBounds {
  double ratio;  // Gamma(a + b) / (Gamma(a) Gamma(b))
  double lower;  // a b / (a + b)
  double upper;  // a 2^(a + b) b / (a + b)
  bool holds;
};

GammaRatioBounds lemma1_ratio(double a, double b);

/// BetaPrime(a, b) distribution function.
double beta_prime_cdf(double x, double a, double b);

/// Two-sided prior tail 2 * int_k^inf g(x) dx (sigma = 1) and the chain of
/// upper bounds obtained from erfc(z) <= exp(-z^2), domination of
/// BetaPrime(a, b) by BetaPrime(a, 1), and dropping (1 + u)^(-a-1).
struct TailBound {
  double tail;
  double first;      // 2 E_{a,b}[exp(-k^2 / (2 omega2))]
  double dominated;  // 2 a int_0^inf (1 + u)^(-a-1) exp(-u k^2 / 2) du
  double bound;      // 4 a / k^2
  bool holds;        // tail <= first <= dominated <= bound
};

/// Requires b > 1.
TailBound tail_mass_bound(double k, double a, double b);

/// True when the BetaPrime(a, b) CDF is at least the BetaPrime(a, 1) CDF at
/// every grid point. Requires b > 1 (b == 1 is accepted) and a positive grid.
bool stochastic_dominance_check(double a, double b, const std::vector<double>& grid);

/// Number of coefficients with |beta_i / sigma| > delta.
int generalized_dimension(const Eigen::VectorXd& beta, double sigma, double delta);

}  // namespace nbp
