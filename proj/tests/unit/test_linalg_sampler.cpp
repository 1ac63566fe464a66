#include <cmath>

#include <gtest/gtest.h>

#include "nbp/errors.hpp"
#include "nbp/linalg_sampler.hpp"
#include "test_support.hpp"

using namespace nbp;
using namespace nbp::testing;

namespace {

DiagScale random_scale(Eigen::Index p, RngStream& rng) {
  Eigen::VectorXd d(p);
  for (Eigen::Index i = 0; i < p; ++i) d[i] = std::exp(3.0 * rng.uniform() - 1.5);
  return DiagScale(d);
}

Eigen::MatrixXd dense_precision(const Eigen::MatrixXd& x, const DiagScale& d) {
  Eigen::MatrixXd a = x.transpose() * x;
  a.diagonal() += d.values().cwiseInverse();
  return a;
}

}  // namespace

TEST(DiagScale, RejectsNonPositiveEntries) {
  EXPECT_THROW(DiagScale(Eigen::VectorXd::Constant(3, 0.0)), DomainError);
  Eigen::VectorXd v(2);
  v << 1.0, INFINITY;
  EXPECT_THROW(DiagScale{v}, DomainError);
}

TEST(SampleConditionalBeta, ScalarPosterior) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  const DiagScale d(Eigen::VectorXd::Ones(1));
  BetaSampler sampler(x, y);
  RngStream rng(3);
  std::vector<double> draws(200000);
  for (double& b : draws) b = sampler.draw(d, 1.0, rng)[0];
  const MeanSe ms = mean_se(draws);
  EXPECT_LT(std::abs(ms.mean - 0.8), 4.0 * ms.se);
  double var = 0.0;
  for (double b : draws) var += (b - ms.mean) * (b - ms.mean);
  var /= draws.size() - 1.0;
  EXPECT_NEAR(var, 0.2, 4.0 * 0.2 * std::sqrt(2.0 / draws.size()));
}

TEST(SampleConditionalBeta, FastRouteMatchesCholeskyOracle) {
  RngStream setup(101);
  const int n = 10, p = 30, draws = 200000;
  const Eigen::MatrixXd x = random_normal_matrix(n, p, setup);
  const Eigen::VectorXd y = random_normal_vector(n, setup);
  const DiagScale d = random_scale(p, setup);
  const double sigma2 = 0.7;
  BetaSampler sampler(x, y);
  RngStream r1(1), r2(2);
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p), q1 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd s2 = s1, q2 = q1;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd a = sampler.draw(d, sigma2, r1, BetaRoute::fast);
    const Eigen::VectorXd b = oracle_beta_draw(x, y, d.values(), sigma2, r2);
    s1 += a;
    q1 += a.cwiseAbs2();
    s2 += b;
    q2 += b.cwiseAbs2();
  }
  for (int i = 0; i < p; ++i) {
    const double m1 = s1[i] / draws, m2 = s2[i] / draws;
    const double v1 = q1[i] / draws - m1 * m1, v2 = q2[i] / draws - m2 * m2;
    EXPECT_LT(std::abs(m1 - m2), 4.0 * std::sqrt((v1 + v2) / draws)) << "mean " << i;
    // Var of a sample variance for a Gaussian is 2 v^2 / N.
    EXPECT_LT(std::abs(v1 - v2), 4.0 * std::sqrt(2.0 * (v1 * v1 + v2 * v2) / draws)) << "var " << i;
  }
}

TEST(SampleConditionalBeta, RoutesShareExactMoments) {
  RngStream setup(202);
  const Eigen::MatrixXd x = random_normal_matrix(6, 15, setup);
  const Eigen::VectorXd y = random_normal_vector(6, setup);
  const DiagScale d = random_scale(15, setup);
  BetaSampler sampler(x, y);
  const Eigen::VectorXd oracle = dense_precision(x, d).ldlt().solve(x.transpose() * y);
  EXPECT_LT((sampler.conditional_mean(d) - oracle).norm(), 1e-10 * oracle.norm());
  EXPECT_EQ(sampler.preferred_route(), BetaRoute::fast);
  BetaSampler tall(random_normal_matrix(40, 5, setup), random_normal_vector(40, setup));
  EXPECT_EQ(tall.preferred_route(), BetaRoute::direct);
}

TEST(SampleConditionalBeta, DiffusePriorRecoversLeastSquares) {
  RngStream setup(303);
  const int n = 30, p = 5;
  const Eigen::MatrixXd x = random_normal_matrix(n, p, setup);
  const Eigen::VectorXd y = random_normal_vector(n, setup);
  const DiagScale d(Eigen::VectorXd::Constant(p, 1e12));
  const Eigen::VectorXd ls = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  BetaSampler sampler(x, y);
  EXPECT_LT((sampler.conditional_mean(d) - ls).norm(), 1e-4 * ls.norm());
  RngStream rng(4);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
  const int draws = 20000;
  for (int k = 0; k < draws; ++k) acc += sampler.draw(d, 1e-6, rng);
  EXPECT_LT((acc / draws - ls).norm(), 1e-4 * ls.norm());
}

TEST(SampleConditionalBeta, RejectsBadInput) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 2);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  RngStream rng(1);
  const DiagScale d(Eigen::VectorXd::Ones(2));
  EXPECT_THROW(sample_conditional_beta(x, y, d, -1.0, rng), DomainError);
  EXPECT_THROW(sample_conditional_beta(x, y, DiagScale(Eigen::VectorXd::Ones(3)), 1.0, rng), DomainError);
  Eigen::VectorXd bad = y;
  bad[0] = std::nan("");
  EXPECT_THROW(sample_conditional_beta(x, bad, d, 1.0, rng), DomainError);
}

TEST(SmwSolve, ZeroDesignCollapsesToD) {
  RngStream rng(5);
  const DiagScale d = random_scale(7, rng);
  const Eigen::MatrixXd b = random_normal_matrix(7, 3, rng);
  const Eigen::MatrixXd r = smw_solve(Eigen::MatrixXd::Zero(4, 7), d, b);
  EXPECT_LT((r - d.values().asDiagonal() * b).norm(), 1e-14 * b.norm());
}

TEST(SmwSolve, MatchesDenseInverse) {
  RngStream rng(6);
  const Eigen::MatrixXd x = random_normal_matrix(8, 40, rng);
  const DiagScale d = random_scale(40, rng);
  const Eigen::MatrixXd b = random_normal_matrix(40, 4, rng);
  const Eigen::MatrixXd a = dense_precision(x, d);
  const Eigen::MatrixXd ref = a.inverse() * b;
  const Eigen::MatrixXd r = smw_solve(x, d, b);
  EXPECT_LT((r - ref).norm(), 1e-8 * ref.norm());
  EXPECT_LT((a * r - b).norm(), 1e-8 * b.norm());
}

TEST(SmwSolve, SolveOfProductIdentity) {
  RngStream rng(7);
  const Eigen::MatrixXd x = random_normal_matrix(5, 20, rng);
  const DiagScale d = random_scale(20, rng);
  const Eigen::MatrixXd m = random_normal_matrix(20, 2, rng);
  const Eigen::MatrixXd r = smw_solve(x, d, dense_precision(x, d) * m);
  EXPECT_LT((r - m).norm(), 1e-8 * m.norm());
}

TEST(SmwSolve, IdentityRightHandSideGivesSymmetricInverse) {
  RngStream rng(8);
  const Eigen::MatrixXd x = random_normal_matrix(6, 25, rng);
  const DiagScale d = random_scale(25, rng);
  const Eigen::MatrixXd r = smw_solve(x, d, Eigen::MatrixXd::Identity(25, 25));
  EXPECT_LT((r - r.transpose()).norm(), 1e-10 * r.norm());
}

TEST(LogDetPrecision, MatchesDenseDeterminant) {
  RngStream rng(9);
  const Eigen::MatrixXd x = random_normal_matrix(7, 18, rng);
  const DiagScale d = random_scale(18, rng);
  const Eigen::LLT<Eigen::MatrixXd> llt(dense_precision(x, d));
  const double ref = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  EXPECT_NEAR(log_det_precision(x, d), ref, 1e-9 * std::abs(ref));
}

TEST(RobustCholesky, RecoversNearlySingularWithJitter) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0;
  EXPECT_NO_THROW(robust_cholesky(a));
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(robust_cholesky(neg), NumericError);
}
