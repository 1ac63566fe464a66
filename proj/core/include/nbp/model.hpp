#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nbp {

/// Design and response after centering (and column scaling of X), plus the
/// metadata needed to undo it.
struct RegressionData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_scales;
  double y_mean = 0.0;
  bool standardized = false;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
};

/// Hyperparameters of the normal-beta prime hierarchy:
///   beta_i | omega_i^2, sigma^2 ~ N(0, sigma^2 omega_i^2)
///   omega_i^2 ~ BetaPrime(a, b),  sigma^2 ~ IG(c, d).
struct NbpHyperparams {
  double a = 0.01;
  double b = 0.01;
  double c = 1e-5;
  double d = 1e-5;

  void validate() const;
};

/// One Gibbs configuration; omega_i^2 = lambda2_i * xi2_i.
struct LatentState {
  Eigen::VectorXd beta;
  Eigen::VectorXd lambda2;
  Eigen::VectorXd xi2;
  double sigma2 = 1.0;

  void validate() const;
};

struct PosteriorSummary {
  Eigen::MatrixXd samples;  // S x p retained beta draws
  Eigen::VectorXd sigma2_samples;
  Eigen::VectorXd beta_median;
  Eigen::VectorXd beta_mean;
  Eigen::VectorXd credible_lower;  // 2.5% equal-tailed
  Eigen::VectorXd credible_upper;  // 97.5%
  double a_hat = 0.0;
  double b_hat = 0.0;
  std::vector<std::pair<double, double>> em_trace;
};

/// Centers every column of X and y, scales columns of X to unit sample sd
/// (n - 1 denominator). Throws DomainError for n < 2 or a constant column.
RegressionData standardize(const Eigen::MatrixXd& raw_x, const Eigen::VectorXd& raw_y);

/// Inverse of standardize: recovers the raw design and response.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> destandardize(const RegressionData& data);

/// Coefficients on the standardized scale mapped back to raw columns.
Eigen::VectorXd coefficients_to_raw_scale(const RegressionData& data, const Eigen::VectorXd& beta);

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);

/// Fills median, mean and the 95% equal-tailed interval from `samples`.
void summarize_draws(PosteriorSummary& summary);

}  // namespace nbp
