#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nbp/experiment.hpp"
#include "nbp/theory_probe.hpp"

namespace nbp {

inline constexpr const char* kFitSchema = "nbp.fit/1";
inline constexpr const char* kSimulateSchema = "nbp.simulate/1";
inline constexpr const char* kMspeSchema = "nbp.mspe/1";

struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> predictor_names;
  std::string response_name;
};

/// Reads a comma-separated file with a header row. The column named
/// `response` becomes y and every other column a predictor. IoError for
/// unreadable or malformed files, DomainError for a missing response column.
Dataset read_csv_dataset(const std::string& path, const std::string& response);

/// Writes `content` to `path`, or to stdout when path is empty or "-".
void write_output(const std::string& path, const std::string& content);

std::string fit_report_json(const FitOutput& fit, const std::vector<std::string>& names,
                            Engine engine, double elapsed_seconds);

std::string experiment_report_json(const ExperimentSpec& spec, const MetricsReport& report,
                                   double elapsed_seconds);
std::string experiment_report_csv(const MetricsReport& report);

std::string mspe_report_json(const MspeResult& result, int folds, Engine engine,
                             double elapsed_seconds);

std::string marginal_grid_csv(const std::vector<MarginalGrid>& grids);

}  // namespace nbp
