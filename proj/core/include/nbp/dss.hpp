#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nbp/rand_dist.hpp"

namespace nbp {

struct DssResult {
  Eigen::VectorXd gamma_hat;
  std::vector<Eigen::Index> support;  // indices of nonzero gamma_hat, ascending
  double lambda_chosen = 0.0;
  std::vector<std::pair<double, double>> cv_curve;  // (lambda, cv_mse), lambda decreasing
};

struct CdOptions {
  double tol = 1e-7;  // on the largest coefficient change in a full cycle
  long max_cycles = 100000;
};

/// (1/(2n)) |target - X gamma|^2 + lambda sum_i w_i |gamma_i|. Coordinates
/// with infinite weight must be zero and contribute nothing.
double adaptive_lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                                const Eigen::VectorXd& weights, double lambda,
                                const Eigen::VectorXd& gamma);

/// Cyclic coordinate descent with soft-thresholding. An infinite weight pins
/// that coefficient at zero. `warm_start` seeds the iterate; when
/// `objective_trace` is given the objective after every cycle is appended.
Eigen::VectorXd adaptive_lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                                  const Eigen::VectorXd& weights, double lambda,
                                  const CdOptions& options = {},
                                  const Eigen::VectorXd* warm_start = nullptr,
                                  std::vector<double>* objective_trace = nullptr);

/// Smallest lambda whose solution is identically zero: max |X_i' target| / (n w_i).
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                        const Eigen::VectorXd& weights);

/// `count` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, int count = 100, double ratio = 1e-4);

/// Weights 1/|beta_hat_i|; entries below 1e-10 in magnitude get infinite weight.
Eigen::VectorXd dss_weights(const Eigen::VectorXd& beta_hat);

enum class CvRule {
  min_error,  // lambda with the smallest cross-validated error
  one_se,     // largest lambda within one standard error of that minimum
};

/// Decoupled shrinkage and selection: adaptive lasso on the pseudo-response
/// X beta_hat, lambda chosen by `folds`-fold cross-validation, then refit on
/// all rows. Held-out error is measured against the pseudo-response; ties go
/// to the larger lambda. The grid has 100 log-spaced values down to 1e-2
/// lambda_max when p > n (1e-4 otherwise) and is cut where the full-data fit
/// explains more than 99.9% of the pseudo-response or stops improving.
DssResult dss_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta_hat, int folds,
                     RngStream& rng, CvRule rule = CvRule::min_error);

}  // namespace nbp
