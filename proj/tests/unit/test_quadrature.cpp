#include <cmath>

#include <gtest/gtest.h>

#include "nbp/errors.hpp"
#include "nbp/quadrature.hpp"

using namespace nbp;

TEST(Integrate, PolynomialsExactly) {
  const auto r = integrate([](double x) { return x * x * x - 2 * x + 1; }, -1.0, 3.0);
  EXPECT_NEAR(r.value, 20.0 - 8.0 + 4.0, 1e-12);
  EXPECT_EQ(r.intervals, 1);
}

TEST(Integrate, SmoothAndPeakedIntegrands) {
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0).value, std::sqrt(M_PI), 1e-12);
  const auto peaked = integrate([](double x) { return 1e-4 / (x * x + 1e-8); }, -1.0, 1.0);
  EXPECT_NEAR(peaked.value, 2.0 * std::atan(1e4), 1e-9);
  EXPECT_GT(peaked.intervals, 1);
}

TEST(Integrate, BreakpointsOverload) {
  auto f = [](double x) { return std::sqrt(std::abs(x)); };
  const auto r = integrate(f, std::vector<double>{-1.0, 0.0, 4.0});
  EXPECT_NEAR(r.value, 2.0 / 3.0 + 16.0 / 3.0, 1e-9);
  EXPECT_THROW(integrate(f, std::vector<double>{1.0}), DomainError);
}

TEST(Integrate, ErrorsOnNonFiniteOrBudget) {
  EXPECT_THROW(integrate([](double) { return std::nan(""); }, 0.0, 1.0), NumericError);
  QuadratureOptions opt;
  opt.max_intervals = 2;
  opt.rel_tol = 1e-15;
  EXPECT_THROW(integrate([](double x) { return std::sin(200 * x); }, 0.0, 10.0, opt), NumericError);
}
