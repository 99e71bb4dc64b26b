#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "tailmoments/core.hpp"
#include "tailmoments/harness.hpp"
#include "tailmoments/maxlinear.hpp"
#include "tailmoments/oracle.hpp"

namespace tailmoments {

using Json = nlohmann::json;

/// Shortest text that reads back to the same double.
std::string format_double(double x);

/// Comma-separated numbers, one row per line. A first line whose first
/// token is not numeric is taken as a header and skipped.
DataMatrix read_csv(std::istream& in);
DataMatrix read_csv_file(const std::string& path);

/// 17 significant digits; optional header X1,...,Xd.
void write_csv(std::ostream& out, const Matrix& values, bool header);
void write_csv_file(const std::string& path, const Matrix& values, bool header);

Json read_json_file(const std::string& path);

Json to_json(const EstimateReport& rep);
std::string to_csv(const EstimateReport& rep);

DiscreteSpectralMeasure measure_from_json(const Json& j);
Json to_json(const DiscreteSpectralMeasure& m);

MaxLinearModel model_from_json(const Json& j);
Json to_json(const MaxLinearModel& m);

/// Keys: model {"coeffs"} or scenario [p, q], n, k, u_quantile, reps, seed,
/// eps, estimators, index_set (1-based), keep_estimates, threads.
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentReport& r);
Json to_json(const OracleAvars& a, const IndexSet& set);

}  // namespace tailmoments
