#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "nbp/linalg_sampler.hpp"
#include "nbp/model.hpp"
#include "nbp/rand_dist.hpp"

namespace nbp {

struct McemConfig {
  int total_iters = 15000;
  int burn_in = 10000;
  int em_block = 100;   // sweeps between (a, b) updates
  double em_tol = 1e-6; // on the squared distance between successive (a, b)
  int em_max = 100;
  std::uint64_t seed = 1;
  double a0 = 0.01;
  double b0 = 0.01;

  void validate() const;
};

/// Conditional parameters used by one sweep; exposed for testing.
struct SigmaConditional {
  double shape;
  double scale;
};

SigmaConditional sigma2_conditional(const RegressionData& data, const Eigen::VectorXd& beta,
                                    const Eigen::VectorXd& d_scale, const NbpHyperparams& hyper);

/// Gibbs sampler over the reparameterized NBP conditionals:
///   beta | rest      ~ N((X'X + D^-1)^-1 X'y, sigma2 (X'X + D^-1)^-1)
///   lambda2_i | rest ~ GIG(beta_i^2 / (sigma2 xi2_i), 2, a - 1/2)
///   xi2_i | rest     ~ IG(b + 1/2, beta_i^2 / (2 sigma2 lambda2_i) + 1)
///   sigma2 | rest    ~ IG((n + p + 2c)/2, (|y - X beta|^2 + beta' D^-1 beta + 2d)/2)
/// updated in that order within a sweep.
class GibbsSampler {
 public:
  explicit GibbsSampler(const RegressionData& data);

  /// One full sweep from `state`; `sweep_index` only labels errors.
  LatentState sweep(const LatentState& state, const NbpHyperparams& hyper, RngStream& rng,
                    long sweep_index = 0) const;

  const RegressionData& data() const { return data_; }

 private:
  const RegressionData& data_;
  BetaSampler beta_sampler_;
};

/// Stateless wrapper: builds a GibbsSampler and performs one sweep.
LatentState gibbs_sweep(const LatentState& state, const RegressionData& data,
                        const NbpHyperparams& hyper, RngStream& rng);

/// M-step: a = psi^{-1}(mean E[log lambda2]), b = psi^{-1}(-mean E[log xi2]).
std::pair<double, double> em_update(const Eigen::VectorXd& log_lambda2_means,
                                    const Eigen::VectorXd& log_xi2_means);

/// Starting state: beta = 0, unit local scales, sigma2 = sample variance of y.
LatentState initial_state(const RegressionData& data);

/// Monte Carlo EM: Gibbs sweeps with an (a, b) update from the block means of
/// log lambda2 and log xi2 every em_block sweeps until the squared change in
/// (a, b) drops below em_tol or em_max updates have run. Draws after burn_in
/// are retained.
/// `hyper_init` supplies the starting (a, b) and the fixed (c, d).
PosteriorSummary run_mcem(const RegressionData& data, const McemConfig& config,
                          const NbpHyperparams& hyper_init);

/// Starts from (config.a0, config.b0) with c = d = 1e-5.
PosteriorSummary run_mcem(const RegressionData& data, const McemConfig& config);

}  // namespace nbp
