#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nbp/model.hpp"

namespace nbp {

/// Mean-field family q1(beta) q2(lambda2) q3(xi2) q4(sigma2):
///   q1 = N(beta_star, Sigma_star)
///   q2_i = GIG(k_star_i, l_star, m_star)
///   q3_i = IG(u_star, v_star_i)
///   q4 = IG(c_star, d_star)
struct VariationalParams {
  Eigen::VectorXd beta_star;
  Eigen::MatrixXd Sigma_star;
  Eigen::VectorXd k_star;
  double l_star = 2.0;
  double m_star = 0.0;
  double u_star = 1.0;
  Eigen::VectorXd v_star;
  double c_star = 1.0;
  double d_star = 1.0;

  void validate() const;
};

/// Per-coordinate expectations under q2 and q3 plus the q4 moments.
struct VariationalMoments {
  Eigen::VectorXd lambda2_mean;
  Eigen::VectorXd inv_lambda2;
  Eigen::VectorXd log_lambda2;
  Eigen::VectorXd inv_xi2;
  Eigen::VectorXd log_xi2;
  double inv_sigma2 = 0.0;
  double log_sigma2 = 0.0;
};

VariationalMoments variational_moments(const VariationalParams& params);

/// Starting point: beta_star = 0, Sigma_star = I, m = a - 1/2, u = b + 1/2,
/// c_star = (n + p + 2c) / 2 and the given constant d_star, k_star, v_star.
VariationalParams initial_variational_params(const RegressionData& data,
                                             const NbpHyperparams& hyper, double d_star0,
                                             double k_star0, double v_star0);

/// One coordinate-ascent sweep at fixed (a, b): q1, then q2 (k and m), then
/// q3 (v and u), then q4. With D*_i = E[1/lambda2_i] E[1/xi2_i],
///   Phi = (X'X + D*)^{-1}, beta_star = Phi X'y, Sigma_star = (d*/c*) Phi,
///   k_i = E[beta_i^2] E[1/sigma2] E[1/xi2_i],
///   v_i = E[beta_i^2] E[1/sigma2] E[1/lambda2_i] / 2 + 1,
///   d* = (E|y - X beta|^2 + E[beta' D* beta] + 2d) / 2.
/// Phi goes through Sherman-Morrison-Woodbury when p > 2n.
VariationalParams cavi_step(const VariationalParams& params, const RegressionData& data,
                            const NbpHyperparams& hyper);

/// Evidence lower bound E_q[log p(y, beta, lambda2, xi2, sigma2)] - E_q[log q].
double elbo(const VariationalParams& params, const RegressionData& data,
            const NbpHyperparams& hyper);

/// Type-II maximum likelihood step from the variational expectations.
std::pair<double, double> variational_em_update(const VariationalParams& params);

struct VarEmConfig {
  double tol = 1e-3;
  int max_iters = 1000;
  double a0 = 0.01;
  double b0 = 0.01;
  double d_star0 = 1.0;
  double k_star0 = 1.0;
  double v_star0 = 1.0;

  void validate() const;
};

struct VarEmResult {
  VariationalParams params;
  double a_hat = 0.0;
  double b_hat = 0.0;
  std::vector<double> elbo_trace;  // starts with the ELBO at the initial params
  std::vector<std::pair<double, double>> ab_trace;
  int iterations = 0;
  bool converged = false;
};

/// Alternates cavi_step with the (a, b) update until the ELBO changes by less
/// than tol or max_iters is reached.
VarEmResult run_var_em(const RegressionData& data, const VarEmConfig& config,
                       const NbpHyperparams& hyper_init);
VarEmResult run_var_em(const RegressionData& data, const VarEmConfig& config);

/// Posterior summaries from q1: mean and median are beta_star, the interval
/// is beta_star -/+ 1.96 sd.
PosteriorSummary to_posterior_summary(const VarEmResult& result);

}  // namespace nbp
