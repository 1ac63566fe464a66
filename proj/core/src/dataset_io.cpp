#include "nbp/dataset_io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nbp/errors.hpp"

namespace nbp {
namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s, std::size_t line_no, std::size_t col) {
  if (s.empty()) {
    throw IoError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                  ": empty cell");
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw IoError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                  ": not a finite number: '" + s + "'");
  }
  return v;
}

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json summary_json(const MetricSummary& s) { return Json{{"mean", s.mean}, {"se", s.se}}; }

}  // namespace

Dataset read_csv_dataset(const std::string& path, const std::string& response) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  const std::vector<std::string> header = split_line(line);

  std::size_t response_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == response) response_col = c;
  }
  if (response_col == header.size()) {
    throw DomainError("response column '" + response + "' not found in '" + path + "'");
  }
  if (header.size() < 2) throw DomainError("'" + path + "' has no predictor columns");

  Dataset ds;
  ds.response_name = response;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != response_col) ds.predictor_names.push_back(header[c]);
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_cell(cells[c], line_no, c);
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  if (rows.empty()) throw IoError("'" + path + "' has no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(header.size() - 1);
  ds.x.resize(n, p);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index j = 0;
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == response_col) ds.y[i] = row[c];
      else ds.x(i, j++) = row[c];
    }
  }
  return ds;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string fit_report_json(const FitOutput& fit, const std::vector<std::string>& names,
                            Engine engine, double elapsed_seconds) {
  const PosteriorSummary& s = fit.summary;
  Json j;
  j["schema_version"] = kFitSchema;
  j["engine"] = engine_name(engine);
  j["coefficient_scale"] = "standardized";
  j["n_predictors"] = s.beta_mean.size();
  j["a_hat"] = s.a_hat;
  j["b_hat"] = s.b_hat;
  j["beta_median"] = vec(s.beta_median);
  j["beta_mean"] = vec(s.beta_mean);
  j["ci_lower"] = vec(s.credible_lower);
  j["ci_upper"] = vec(s.credible_upper);
  Json support = Json::array(), support_names = Json::array();
  for (Eigen::Index idx : fit.dss.support) {
    support.push_back(idx);
    if (static_cast<std::size_t>(idx) < names.size()) support_names.push_back(names[static_cast<std::size_t>(idx)]);
  }
  j["support"] = support;
  j["support_names"] = support_names;
  j["dss_lambda"] = fit.dss.lambda_chosen;
  Json trace = Json::array();
  for (const auto& [a, b] : s.em_trace) trace.push_back(Json::array({a, b}));
  j["em_trace"] = trace;
  j["elapsed_seconds"] = elapsed_seconds;
  return j.dump(2) + "\n";
}

std::string experiment_report_json(const ExperimentSpec& spec, const MetricsReport& report,
                                   double elapsed_seconds) {
  Json j;
  j["schema_version"] = kSimulateSchema;
  Json sj;
  sj["n"] = spec.n;
  sj["p"] = spec.p;
  sj["n_active"] = spec.n_active;
  if (spec.signal.kind == SignalLaw::Kind::fixed) {
    sj["signal_law"] = Json{{"kind", "fixed"}, {"value", spec.signal.value}};
  } else {
    sj["signal_law"] = Json{{"kind", "uniform_pm"}, {"lo", spec.signal.lo}, {"hi", spec.signal.hi}};
  }
  sj["sigma2_true"] = spec.sigma2_true;
  sj["correlation_rho"] = spec.correlation_rho;
  sj["replications"] = spec.replications;
  sj["seed"] = spec.seed;
  sj["engine"] = engine_name(spec.engine);
  sj["fixed_support"] = spec.fixed_support;
  j["spec"] = sj;
  j["mse"] = summary_json(report.mse);
  j["fdr"] = summary_json(report.fdr);
  j["fnr"] = summary_json(report.fnr);
  j["mp"] = summary_json(report.mp);
  j["a_hat"] = summary_json(report.a_hat);
  j["b_hat"] = summary_json(report.b_hat);
  j["failures"] = report.failures;
  j["failure_messages"] = report.failure_messages;
  Json rows = Json::array();
  for (const MetricsRow& r : report.rows) {
    rows.push_back(Json{{"replication", r.replication}, {"mse", r.mse}, {"fdr", r.fdr},
                        {"fnr", r.fnr}, {"mp", r.mp}, {"tp", r.tp}, {"fp", r.fp},
                        {"tn", r.tn}, {"fn", r.fn}, {"a_hat", r.a_hat}, {"b_hat", r.b_hat}});
  }
  j["replications"] = rows;
  j["elapsed_seconds"] = elapsed_seconds;
  return j.dump(2) + "\n";
}

std::string experiment_report_csv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "replication,mse,fdr,fnr,mp,tp,fp,tn,fn,a_hat,b_hat\n";
  for (const MetricsRow& r : report.rows) {
    out << r.replication << ',' << r.mse << ',' << r.fdr << ',' << r.fnr << ',' << r.mp << ','
        << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn << ',' << r.a_hat << ',' << r.b_hat
        << '\n';
  }
  return out.str();
}

std::string mspe_report_json(const MspeResult& result, int folds, Engine engine,
                             double elapsed_seconds) {
  Json j;
  j["schema_version"] = kMspeSchema;
  j["engine"] = engine_name(engine);
  j["folds"] = folds;
  j["mspe"] = result.mspe;
  j["fold_mse"] = result.fold_mse;
  j["elapsed_seconds"] = elapsed_seconds;
  return j.dump(2) + "\n";
}

std::string marginal_grid_csv(const std::vector<MarginalGrid>& grids) {
  std::ostringstream out;
  out.precision(17);
  out << "a,b,sigma2,beta,density\n";
  for (const MarginalGrid& g : grids) {
    for (const auto& [x, dens] : g.points) {
      out << g.a << ',' << g.b << ',' << g.sigma2 << ',' << x << ',' << dens << '\n';
    }
  }
  return out.str();
}

}  // namespace nbp
