#include "nbp/dss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nbp/errors.hpp"

namespace nbp {
namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void check_weights(const Eigen::VectorXd& w) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::isnan(w[i]) || !(w[i] > 0.0)) {
      throw DomainError("adaptive lasso weights must be positive (infinite pins to zero)");
    }
  }
}

class CoordinateDescent {
 public:
  CoordinateDescent(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                    const Eigen::VectorXd& weights)
      : x_(x), t_(target), w_(weights), inv_n_(1.0 / static_cast<double>(x.rows())) {
    col_scale_ = x.colwise().squaredNorm().transpose() * inv_n_;
  }

  Eigen::VectorXd solve(double lambda, const CdOptions& opt, const Eigen::VectorXd* warm,
                        std::vector<double>* trace) {
    const Eigen::Index p = x_.cols();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    if (warm != nullptr) {
      if (warm->size() != p) throw DomainError("adaptive_lasso_cd: warm start has wrong length");
      g = *warm;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (std::isinf(w_[j])) g[j] = 0.0;
      }
    }
    Eigen::VectorXd r = t_ - x_ * g;

    std::vector<Eigen::Index> all;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::isfinite(w_[j]) && col_scale_[j] > 0.0) all.push_back(j);
    }

    long cycles = 0;
    std::vector<Eigen::Index> active;
    while (true) {
      const double change = cycle(all, lambda, g, r);
      record(trace, lambda, g);
      if (++cycles > opt.max_cycles) break;
      if (change < opt.tol) return g;

      active.clear();
      for (Eigen::Index j : all) {
        if (g[j] != 0.0) active.push_back(j);
      }
      while (true) {
        const double inner = cycle(active, lambda, g, r);
        record(trace, lambda, g);
        if (++cycles > opt.max_cycles) break;
        if (inner < opt.tol) break;
      }
      if (cycles > opt.max_cycles) break;
    }
    throw NumericError("adaptive_lasso_cd: no convergence within the cycle limit");
  }

 private:
  double cycle(const std::vector<Eigen::Index>& coords, double lambda, Eigen::VectorXd& g,
               Eigen::VectorXd& r) const {
    double max_change = 0.0;
    for (Eigen::Index j : coords) {
      const double cj = col_scale_[j];
      const double old = g[j];
      const double z = x_.col(j).dot(r) * inv_n_ + cj * old;
      const double next = soft_threshold(z, lambda * w_[j]) / cj;
      if (next != old) {
        r.noalias() -= (next - old) * x_.col(j);
        g[j] = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    return max_change;
  }

  void record(std::vector<double>* trace, double lambda, const Eigen::VectorXd& g) const {
    if (trace != nullptr) trace->push_back(adaptive_lasso_objective(x_, t_, w_, lambda, g));
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& t_;
  const Eigen::VectorXd& w_;
  double inv_n_;
  Eigen::VectorXd col_scale_;
};

// Fisher-Yates on 0..n-1; written out so the permutation does not depend on
// the standard library's shuffle.
std::vector<Eigen::Index> permutation(Eigen::Index n, RngStream& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Eigen::Index>(r)] = v[rows[r]];
  return out;
}

}  // namespace

double adaptive_lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                                const Eigen::VectorXd& weights, double lambda,
                                const Eigen::VectorXd& gamma) {
  const double n = static_cast<double>(x.rows());
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    if (gamma[i] == 0.0) continue;
    penalty += weights[i] * std::abs(gamma[i]);
  }
  return (target - x * gamma).squaredNorm() / (2.0 * n) + lambda * penalty;
}

Eigen::VectorXd adaptive_lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                                  const Eigen::VectorXd& weights, double lambda,
                                  const CdOptions& options, const Eigen::VectorXd* warm_start,
                                  std::vector<double>* objective_trace) {
  if (x.rows() < 1) throw DomainError("adaptive_lasso_cd: empty design");
  if (target.size() != x.rows() || weights.size() != x.cols()) {
    throw DomainError("adaptive_lasso_cd: dimension mismatch");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("adaptive_lasso_cd: lambda must be finite and non-negative");
  }
  check_weights(weights);
  return CoordinateDescent(x, target, weights).solve(lambda, options, warm_start, objective_trace);
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                        const Eigen::VectorXd& weights) {
  const Eigen::VectorXd score = (x.transpose() * target).cwiseAbs() / static_cast<double>(x.rows());
  double best = 0.0;
  for (Eigen::Index j = 0; j < score.size(); ++j) {
    if (std::isfinite(weights[j])) best = std::max(best, score[j] / weights[j]);
  }
  return best;
}

std::vector<double> lambda_grid(double lambda_max, int count, double ratio) {
  if (!(lambda_max > 0.0) || count < 1 || !(ratio > 0.0 && ratio <= 1.0)) {
    throw DomainError("lambda_grid: invalid arguments");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (int k = 0; k < count; ++k) grid[static_cast<std::size_t>(k)] = lambda_max * std::exp(step * k);
  return grid;
}

Eigen::VectorXd dss_weights(const Eigen::VectorXd& beta_hat) {
  Eigen::VectorXd w(beta_hat.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double m = std::abs(beta_hat[i]);
    w[i] = m < 1e-10 ? std::numeric_limits<double>::infinity() : 1.0 / m;
  }
  return w;
}

DssResult dss_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta_hat, int folds,
                     RngStream& rng, CvRule rule) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (p == 0) throw DomainError("dss_select: no predictors");
  if (beta_hat.size() != p) throw DomainError("dss_select: beta_hat length does not match X");
  if (!beta_hat.allFinite()) throw DomainError("dss_select: non-finite beta_hat");
  if (folds < 2 || n < 2 * folds) throw DomainError("dss_select: need folds >= 2 and n >= 2 * folds");

  const Eigen::VectorXd target = x * beta_hat;
  const Eigen::VectorXd weights = dss_weights(beta_hat);

  DssResult out;
  out.gamma_hat = Eigen::VectorXd::Zero(p);
  const double lmax = lasso_lambda_max(x, target, weights);
  if (!(lmax > 0.0)) {
    out.lambda_chosen = 1.0;
    out.cv_curve.emplace_back(1.0, target.squaredNorm() / static_cast<double>(n));
    return out;
  }
  // Same path rules as glmnet: a higher floor when p > n, and the path ends
  // once the fit explains 99.9% of the target or stops improving.
  std::vector<double> grid = lambda_grid(lmax, 100, n < p ? 1e-2 : 1e-4);
  {
    CoordinateDescent full(x, target, weights);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    const double null_dev = target.squaredNorm();
    double prev_ratio = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      g = full.solve(grid[k], CdOptions{}, &g, nullptr);
      const double ratio = 1.0 - (target - x * g).squaredNorm() / null_dev;
      if (ratio > 0.999 || (k > 0 && ratio - prev_ratio < 1e-5 * ratio)) {
        grid.resize(k + 1);
        break;
      }
      prev_ratio = ratio;
    }
  }
  std::vector<double> cv(grid.size(), 0.0);
  std::vector<double> cv_sq(grid.size(), 0.0);

  const std::vector<Eigen::Index> perm = permutation(n, rng);
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index k = 0; k < n; ++k) {
      (k % folds == f ? test : train).push_back(perm[static_cast<std::size_t>(k)]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    const Eigen::MatrixXd x_train = take_rows(x, train);
    const Eigen::VectorXd t_train = take_rows(target, train);
    const Eigen::MatrixXd x_test = take_rows(x, test);
    const Eigen::VectorXd t_test = take_rows(target, test);

    CoordinateDescent cd(x_train, t_train, weights);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      g = cd.solve(grid[k], CdOptions{}, &g, nullptr);
      const double mse = (t_test - x_test * g).squaredNorm() / static_cast<double>(test.size());
      cv[k] += mse / folds;
      cv_sq[k] += mse * mse / folds;
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.cv_curve.emplace_back(grid[k], cv[k]);
    if (cv[k] < cv[best]) best = k;
  }
  if (rule == CvRule::one_se) {
    const double var = std::max(0.0, cv_sq[best] - cv[best] * cv[best]) * folds / (folds - 1.0);
    const double limit = cv[best] + std::sqrt(var / folds);
    std::size_t k = 0;
    while (cv[k] > limit) ++k;
    best = k;
  }
  out.lambda_chosen = grid[best];

  CoordinateDescent full(x, target, weights);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  for (std::size_t k = 0; k <= best; ++k) g = full.solve(grid[k], CdOptions{}, &g, nullptr);
  out.gamma_hat = g;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (g[j] != 0.0) out.support.push_back(j);
  }
  return out;
}

}  // namespace nbp
