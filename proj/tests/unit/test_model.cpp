#include <cmath>

#include <gtest/gtest.h>

#include "nbp/errors.hpp"
#include "nbp/model.hpp"
#include "test_support.hpp"

using namespace nbp;
using namespace nbp::testing;

TEST(Standardize, HandComputedColumn) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 4, 5, 9;
  const RegressionData d = standardize(x, y);
  EXPECT_NEAR(d.x(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(d.x(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(d.x(2, 0), 1.0, 1e-15);
  EXPECT_NEAR(d.column_means[0], 2.0, 1e-15);
  EXPECT_NEAR(d.column_scales[0], 1.0, 1e-15);
  EXPECT_NEAR(d.y_mean, 6.0, 1e-15);
  EXPECT_NEAR(d.y.sum(), 0.0, 1e-14);
  EXPECT_TRUE(d.standardized);
}

TEST(Standardize, RandomMatrixMomentsExact) {
  RngStream rng(1);
  Eigen::MatrixXd x = random_normal_matrix(20, 5, rng) * 3.0;
  x.array() += 7.0;
  const RegressionData d = standardize(x, random_normal_vector(20, rng));
  for (Eigen::Index j = 0; j < 5; ++j) {
    const double m = d.x.col(j).mean();
    const double sd = std::sqrt(d.x.col(j).squaredNorm() / 19.0);
    EXPECT_LE(std::abs(m), 1e-12);
    EXPECT_LE(std::abs(sd - 1.0), 1e-12);
  }
  EXPECT_LE(std::abs(d.y.mean()), 1e-12);
}

TEST(Standardize, Idempotent) {
  RngStream rng(2);
  const RegressionData d1 = standardize(random_normal_matrix(15, 4, rng), random_normal_vector(15, rng));
  const RegressionData d2 = standardize(d1.x, d1.y);
  EXPECT_LE((d1.x - d2.x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((d1.y - d2.y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, RoundTripRecoversInputs) {
  RngStream rng(3);
  Eigen::MatrixXd x = random_normal_matrix(25, 6, rng);
  x.col(2) *= 100.0;
  x.col(4).array() -= 50.0;
  Eigen::VectorXd y = random_normal_vector(25, rng);
  y.array() += 3.0;
  const auto [rx, ry] = destandardize(standardize(x, y));
  EXPECT_LE((rx - x).cwiseAbs().maxCoeff(), 1e-10 * 100.0);
  EXPECT_LE((ry - y).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardize, ConstantColumnNamesIndex) {
  Eigen::MatrixXd x(4, 3);
  x << 1, 5, 2, 2, 5, 1, 3, 5, 0, 4, 5, 7;
  try {
    standardize(x, Eigen::VectorXd::Ones(4));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos) << e.what();
  }
  EXPECT_THROW(standardize(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1)), DomainError);
}

TEST(CoefficientsToRawScale, PredictionsAgree) {
  RngStream rng(4);
  Eigen::MatrixXd x = random_normal_matrix(12, 3, rng) * 4.0;
  x.array() += 1.5;
  const Eigen::VectorXd y = random_normal_vector(12, rng);
  const RegressionData d = standardize(x, y);
  Eigen::VectorXd beta(3);
  beta << 0.3, -1.2, 2.0;
  const Eigen::VectorXd raw = coefficients_to_raw_scale(d, beta);
  const Eigen::VectorXd pred_std = d.x * beta;
  const Eigen::VectorXd pred_raw = (x.rowwise() - d.column_means.transpose()) * raw;
  EXPECT_LE((pred_std - pred_raw).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hyperparams, Validation) {
  NbpHyperparams h;
  EXPECT_DOUBLE_EQ(h.c, 1e-5);
  EXPECT_DOUBLE_EQ(h.d, 1e-5);
  EXPECT_NO_THROW(h.validate());
  h.a = 0.0;
  EXPECT_THROW(h.validate(), DomainError);
  h.a = 1.0;
  h.d = -1.0;
  EXPECT_THROW(h.validate(), DomainError);
}

TEST(LatentState, Validation) {
  LatentState s;
  s.beta = Eigen::VectorXd::Zero(2);
  s.lambda2 = Eigen::VectorXd::Ones(2);
  s.xi2 = Eigen::VectorXd::Ones(2);
  EXPECT_NO_THROW(s.validate());
  s.xi2[1] = 0.0;
  EXPECT_THROW(s.validate(), NumericError);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0}, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(quantile({0.0, 10.0}, 0.25), 2.5);
}

TEST(SummarizeDraws, OrderedIntervalAndCorrectStatistics) {
  RngStream rng(5);
  PosteriorSummary s;
  s.samples = random_normal_matrix(1001, 4, rng);
  s.samples.col(2).array() += 3.0;
  summarize_draws(s);
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_LE(s.credible_lower[j], s.beta_median[j]);
    EXPECT_LE(s.beta_median[j], s.credible_upper[j]);
    EXPECT_NEAR(s.beta_mean[j], s.samples.col(j).mean(), 1e-12);
    std::vector<double> v(s.samples.col(j).data(), s.samples.col(j).data() + 1001);
    std::sort(v.begin(), v.end());
    EXPECT_DOUBLE_EQ(s.beta_median[j], v[500]);
    EXPECT_DOUBLE_EQ(s.credible_lower[j], v[25]);
    EXPECT_DOUBLE_EQ(s.credible_upper[j], v[975]);
  }
}
