#include "nbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nbp/errors.hpp"

namespace nbp {

void NbpHyperparams::validate() const {
  for (double v : {a, b, c, d}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("hyperparameters a, b, c, d must be positive and finite");
    }
  }
}

void LatentState::validate() const {
  const auto p = beta.size();
  if (lambda2.size() != p || xi2.size() != p) throw DomainError("LatentState: length mismatch");
  if (!beta.allFinite()) throw NumericError("LatentState: non-finite beta");
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(lambda2[i] > 0.0) || !std::isfinite(lambda2[i]) || !(xi2[i] > 0.0) ||
        !std::isfinite(xi2[i])) {
      throw NumericError("LatentState: local scale " + std::to_string(i) +
                         " not positive and finite");
    }
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw NumericError("LatentState: sigma2 not positive and finite");
  }
}

RegressionData standardize(const Eigen::MatrixXd& raw_x, const Eigen::VectorXd& raw_y) {
  const Eigen::Index n = raw_x.rows();
  const Eigen::Index p = raw_x.cols();
  if (n < 2) throw DomainError("standardize: need at least two rows");
  if (raw_y.size() != n) throw DomainError("standardize: response length does not match X");
  if (!raw_x.allFinite() || !raw_y.allFinite()) throw DomainError("standardize: non-finite input");

  RegressionData out;
  out.column_means = raw_x.colwise().mean().transpose();
  out.x = raw_x.rowwise() - out.column_means.transpose();
  out.column_scales.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt(out.x.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::abs(out.column_means[j]))) {
      throw DomainError("standardize: column " + std::to_string(j) + " has zero variance");
    }
    out.column_scales[j] = sd;
    out.x.col(j) /= sd;
  }
  out.y_mean = raw_y.mean();
  out.y = raw_y.array() - out.y_mean;
  out.standardized = true;
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> destandardize(const RegressionData& data) {
  if (!data.standardized) return {data.x, data.y};
  Eigen::MatrixXd x = data.x * data.column_scales.asDiagonal();
  x.rowwise() += data.column_means.transpose();
  Eigen::VectorXd y = data.y.array() + data.y_mean;
  return {std::move(x), std::move(y)};
}

Eigen::VectorXd coefficients_to_raw_scale(const RegressionData& data, const Eigen::VectorXd& beta) {
  if (!data.standardized) return beta;
  return beta.cwiseQuotient(data.column_scales);
}

namespace {

double sorted_quantile(const std::vector<double>& values, double prob) {
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile: probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, prob);
}

void summarize_draws(PosteriorSummary& summary) {
  const Eigen::Index s = summary.samples.rows();
  const Eigen::Index p = summary.samples.cols();
  if (s == 0) throw DomainError("summarize_draws: no retained draws");
  summary.beta_mean = summary.samples.colwise().mean().transpose();
  summary.beta_median.resize(p);
  summary.credible_lower.resize(p);
  summary.credible_upper.resize(p);
  std::vector<double> column(static_cast<std::size_t>(s));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index r = 0; r < s; ++r) column[static_cast<std::size_t>(r)] = summary.samples(r, j);
    std::sort(column.begin(), column.end());
    summary.beta_median[j] = sorted_quantile(column, 0.5);
    summary.credible_lower[j] = sorted_quantile(column, 0.025);
    summary.credible_upper[j] = sorted_quantile(column, 0.975);
  }
}

}  // namespace nbp
