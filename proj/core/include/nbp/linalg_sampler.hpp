#pragma once

#include <Eigen/Dense>

#include "nbp/rand_dist.hpp"

namespace nbp {

/// Diagonal of D = diag(lambda_1^2 xi_1^2, ..., lambda_p^2 xi_p^2): the prior
/// variance scales of beta (in units of sigma^2). Entries positive, finite.
class DiagScale {
 public:
  DiagScale() = default;
  explicit DiagScale(Eigen::VectorXd d);

  const Eigen::VectorXd& values() const { return d_; }
  Eigen::Index size() const { return d_.size(); }
  double operator[](Eigen::Index i) const { return d_[i]; }

 private:
  Eigen::VectorXd d_;
};

enum class BetaRoute { automatic, direct, fast };

/// Draws from beta | rest ~ N(A^{-1} X'y, sigma2 A^{-1}), A = X'X + D^{-1}.
///
/// The sampler caches X'X and X'y; construct once per data set and call
/// draw() every sweep. The direct route factors the p x p matrix A. The fast
/// route (p > 2n by default) works with the n x n matrix X D X' + I_n:
///
///   u ~ N(0, sigma2 D),  delta ~ N(0, I_n),  v = X u / sigma + delta,
///   w = (X D X' + I_n)^{-1} (y / sigma - v),  beta = u + sigma D X' w.
class BetaSampler {
 public:
  BetaSampler(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  Eigen::VectorXd draw(const DiagScale& d, double sigma2, RngStream& rng,
                       BetaRoute route = BetaRoute::automatic) const;

  /// Conditional mean A^{-1} X'y (no randomness).
  Eigen::VectorXd conditional_mean(const DiagScale& d) const;

  /// Route chosen by BetaRoute::automatic: fast when p > 2n.
  BetaRoute preferred_route() const;

  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index p() const { return x_.cols(); }

 private:
  Eigen::VectorXd draw_direct(const DiagScale& d, double sigma2, RngStream& rng) const;
  Eigen::VectorXd draw_fast(const DiagScale& d, double sigma2, RngStream& rng) const;

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
};

/// One-shot convenience wrapper around BetaSampler.
Eigen::VectorXd sample_conditional_beta(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const DiagScale& d, double sigma2, RngStream& rng,
                                        BetaRoute route = BetaRoute::automatic);

/// (X'X + D^{-1})^{-1} B via Sherman-Morrison-Woodbury:
///   D B - D X' (I_n + X D X')^{-1} X D B.
Eigen::MatrixXd smw_solve(const Eigen::MatrixXd& x, const DiagScale& d, const Eigen::MatrixXd& b);

/// log det(X'X + D^{-1}) = -sum log d_i + log det(I_n + X D X').
double log_det_precision(const Eigen::MatrixXd& x, const DiagScale& d);

/// Cholesky of a symmetric positive definite matrix with diagonal jitter
/// escalation (1e-10 * trace / dim, times 10, at most three retries).
/// Throws NumericError when every attempt fails.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& a);

}  // namespace nbp
