#include "tailmoments/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace tailmoments {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& tok, double& out) {
  const std::string t = trim(tok);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), out);
  return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::ParseError, std::string(what) + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(ErrorKind::ParseError, std::string(what) + " rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail(ErrorKind::ParseError, std::string(what) + " entries must be numbers");
      m(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

DataMatrix read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto toks = split_commas(line);
    double first = 0.0;
    if (rows.empty() && lineno == 1 && !parse_number(toks[0], first)) continue;
    std::vector<double> row;
    for (const auto& t : toks) {
      double v = 0.0;
      if (!parse_number(t, v)) {
        fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": '" + trim(t) + "' is not a number");
      }
      row.push_back(v);
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::ParseError, "no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return DataMatrix(std::move(m));
}

DataMatrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const Matrix& values, bool header) {
  if (header) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << 'X' << c + 1;
    out << '\n';
  }
  char buf[40];
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Matrix& values, bool header) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::ParseError, "cannot write '" + path + "'");
  write_csv(out, values, header);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

Json to_json(const EstimateReport& rep) {
  Json j;
  j["method"] = rep.method;
  j["estimate"] = rep.estimate;
  j["inverse_estimate"] = rep.inverse_estimate ? Json(*rep.inverse_estimate) : Json(nullptr);
  j["std_error"] = rep.std_error ? Json(*rep.std_error) : Json(nullptr);
  j["exceedance_count"] = rep.exceedance_count;
  Json params = Json::object();
  for (const auto& [k, v] : rep.parameters) params[k] = finite_or_null(v);
  j["parameters"] = params;
  j["flags"] = rep.flags;
  return j;
}

std::string to_csv(const EstimateReport& rep) {
  std::ostringstream os;
  os << "method,estimate,inverse_estimate,std_error,exceedance_count\n";
  os << rep.method << ',' << format_double(rep.estimate) << ','
     << (rep.inverse_estimate ? format_double(*rep.inverse_estimate) : "") << ','
     << (rep.std_error ? format_double(*rep.std_error) : "") << ',' << rep.exceedance_count << '\n';
  return os.str();
}

DiscreteSpectralMeasure measure_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("probs")) {
    fail(ErrorKind::ParseError, "measure needs \"atoms\" and \"probs\"");
  }
  const Matrix atoms = matrix_from_json(j["atoms"], "atoms");
  const Json& p = j["probs"];
  if (!p.is_array()) fail(ErrorKind::ParseError, "probs must be an array");
  Vector probs(static_cast<Index>(p.size()));
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (!p[a].is_number()) fail(ErrorKind::ParseError, "probs must be numbers");
    probs(static_cast<Index>(a)) = p[a].get<double>();
  }
  return DiscreteSpectralMeasure(atoms, probs);
}

Json to_json(const DiscreteSpectralMeasure& m) {
  Json j;
  j["atoms"] = matrix_to_json(m.atoms());
  j["probs"] = std::vector<double>(m.probs().data(), m.probs().data() + m.probs().size());
  return j;
}

MaxLinearModel model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("coeffs")) fail(ErrorKind::ParseError, "model needs \"coeffs\"");
  return MaxLinearModel(matrix_from_json(j["coeffs"], "coeffs"));
}

Json to_json(const MaxLinearModel& m) {
  Json j;
  j["coeffs"] = matrix_to_json(m.coeffs());
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidConfig, "config must be a JSON object");
  ExperimentConfig cfg;
  try {
    if (j.contains("model")) {
      cfg.model = model_from_json(j["model"]);
    } else if (j.contains("scenario")) {
      const auto pq = j["scenario"].get<std::vector<double>>();
      if (pq.size() != 2) fail(ErrorKind::InvalidConfig, "scenario must be [p, q]");
      cfg.model = make_scenario(pq[0], pq[1]);
    }
    if (j.contains("n")) cfg.n = j["n"].get<Index>();
    if (j.contains("k")) cfg.k = j["k"].get<Index>();
    if (j.contains("u_quantile")) cfg.u_quantile = j["u_quantile"].get<double>();
    if (j.contains("reps")) cfg.reps = j["reps"].get<long long>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("eps") && !j["eps"].is_null()) cfg.eps = j["eps"].get<double>();
    if (j.contains("estimators")) {
      cfg.estimators.clear();
      for (const auto& e : j["estimators"]) cfg.estimators.push_back(method_from_string(e.get<std::string>()));
    }
    if (j.contains("index_set")) cfg.index_set = IndexSet::from_one_based(j["index_set"].get<std::vector<long long>>());
    if (j.contains("keep_estimates")) cfg.keep_estimates = j["keep_estimates"].get<bool>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<unsigned>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidConfig, e.what());
  }
  cfg.validate();
  return cfg;
}

Json to_json(const ExperimentReport& r) {
  Json j;
  j["tau_true"] = r.tau_true;
  Json methods = Json::object();
  for (const MethodSummary& s : r.methods) {
    Json m;
    m["bias"] = s.bias;
    m["emp_std"] = s.emp_std;
    m["theo_std"] = s.theo_std;
    m["mean"] = s.mean;
    m["used"] = s.used;
    m["excluded"] = s.excluded;
    if (!s.estimates.empty()) m["estimates"] = s.estimates;
    methods[to_string(s.method)] = m;
  }
  j["estimators"] = methods;
  return j;
}

Json to_json(const OracleAvars& a, const IndexSet& set) {
  Json j;
  j["avar_bk"] = a.avar_bk;
  j["avar_mk"] = a.avar_mk;
  j["avar_bu"] = a.avar_bu;
  j["avar_mu"] = a.avar_mu;
  const Vector vs = a.v_star.restricted(set);
  const Vector vt = a.v_tilde.restricted(set);
  j["v_star"] = std::vector<double>(vs.data(), vs.data() + vs.size());
  j["v_tilde"] = std::vector<double>(vt.data(), vt.data() + vt.size());
  j["differentiable"] = a.differentiable;
  j["vtilde_condition"] = finite_or_null(a.vtilde_condition);
  return j;
}

}  // namespace tailmoments
