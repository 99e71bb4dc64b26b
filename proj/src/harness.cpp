#include "tailmoments/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <thread>

#include "tailmoments/estimators.hpp"
#include "tailmoments/io.hpp"
#include "tailmoments/oracle.hpp"
#include "tailmoments/weights.hpp"

namespace tailmoments {

std::string to_string(Method m) {
  switch (m) {
    case Method::BK: return "BK";
    case Method::MK: return "MK";
    case Method::BU: return "BU";
    case Method::MU: return "MU";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "BK") return Method::BK;
  if (up == "MK") return Method::MK;
  if (up == "BU") return Method::BU;
  if (up == "MU") return Method::MU;
  fail(ErrorKind::InvalidConfig, "unknown estimator '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (n < 2) fail(ErrorKind::InvalidConfig, "n must be at least 2");
  if (k < 1 || k >= n) fail(ErrorKind::InvalidConfig, "k must satisfy 1 <= k < n");
  if (!(u_quantile > 0.0 && u_quantile < 1.0)) fail(ErrorKind::InvalidConfig, "u_quantile must lie in (0, 1)");
  if (reps < 1) fail(ErrorKind::InvalidConfig, "reps must be positive");
  if (estimators.empty()) fail(ErrorKind::InvalidConfig, "no estimators selected");
  const double e = effective_eps();
  if (!(e > 0.0 && e < 1.0)) fail(ErrorKind::InvalidConfig, "eps must lie in (0, 1)");
  if (index_set) index_set->check_dimension(model.dim());
}

IndexSet ExperimentConfig::effective_set() const { return index_set ? *index_set : IndexSet::full(model.dim()); }

double frechet_quantile(double q) { return -1.0 / std::log(q); }

std::uint64_t repetition_seed(std::uint64_t seed, long long rep) {
  return splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(rep) + 0x632BE59BD9B4E019ULL));
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("TAILMOMENTS_THREADS")) n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

namespace {

std::optional<double> one_estimate(Method m, const DataMatrix& data, const ExperimentConfig& cfg, const IndexSet& set,
                                   double u) {
  try {
    switch (m) {
      case Method::BK: {
        const StandardizedMatrix x = StandardizedMatrix::assume_standardized(data);
        return benchmark_ratio_known(x, u, set, WeightVector::uniform(set, data.d())).estimate;
      }
      case Method::MK:
        return tau_mk(StandardizedMatrix::assume_standardized(data), u, set).estimate;
      case Method::BU: {
        const EstimateReport r = stable_tail_estimate(data, cfg.k, set);
        if (!r.inverse_estimate) return std::nullopt;
        return *r.inverse_estimate;
      }
      case Method::MU:
        return tau_mu(data, cfg.k, set, cfg.effective_eps()).estimate;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoExceedances) throw;
  }
  return std::nullopt;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const IndexSet set = cfg.effective_set();
  const DiscreteSpectralMeasure measure = model_spectral_measure(cfg.model);
  const OracleAvars avars = oracle_avars(measure, set);
  const double u = frechet_quantile(cfg.u_quantile);
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  const std::size_t nm = cfg.estimators.size();

  std::vector<std::optional<double>> results(reps * nm);
  std::vector<std::exception_ptr> errors(reps);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t r = first; r < reps; r += stride) {
      try {
        const DataMatrix data = simulate(cfg.model, cfg.n, repetition_seed(cfg.seed, static_cast<long long>(r)));
        for (std::size_t m = 0; m < nm; ++m) results[r * nm + m] = one_estimate(cfg.estimators[m], data, cfg, set, u);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(worker_count(cfg.threads), static_cast<unsigned>(reps));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report;
  report.tau_true = oracle_tau(measure, set);
  const double target = 1.0 / report.tau_true;
  const double n_known = static_cast<double>(cfg.n) * (1.0 - cfg.u_quantile);
  const double kk = static_cast<double>(cfg.k);
  for (std::size_t m = 0; m < nm; ++m) {
    MethodSummary s;
    s.method = cfg.estimators[m];
    std::vector<double> vals;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& x = results[r * nm + m];
      if (x) {
        vals.push_back(*x);
      } else {
        ++s.excluded;
      }
    }
    s.used = static_cast<long long>(vals.size());
    if (!vals.empty()) {
      double sum = 0.0;
      for (double v : vals) sum += v;
      s.mean = sum / static_cast<double>(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - s.mean) * (v - s.mean);
      s.emp_std = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
      s.bias = s.mean - target;
    }
    switch (s.method) {
      case Method::BK: s.theo_std = std::sqrt(std::max(0.0, avars.avar_bk) / n_known); break;
      case Method::MK: s.theo_std = std::sqrt(std::max(0.0, avars.avar_mk) / n_known); break;
      case Method::BU: s.theo_std = std::sqrt(std::max(0.0, avars.avar_bu) / kk); break;
      case Method::MU: s.theo_std = std::sqrt(std::max(0.0, avars.avar_mu) / kk); break;
    }
    if (cfg.keep_estimates) s.estimates = std::move(vals);
    report.methods.push_back(std::move(s));
  }
  return report;
}

std::vector<std::pair<double, double>> table_scenarios() { return {{0.1, 0.2}, {0.4, 0.6}, {0.8, 0.9}}; }

std::vector<GridRow> avar_grid(const std::vector<std::pair<double, double>>& grid, const IndexSet& set) {
  std::vector<GridRow> rows;
  rows.reserve(grid.size());
  for (const auto& [p, q] : grid) {
    const DiscreteSpectralMeasure m = model_spectral_measure(make_scenario(p, q));
    const OracleAvars a = oracle_avars(m, set);
    auto sd = [](double v) { return std::sqrt(std::max(0.0, v)); };
    rows.push_back(GridRow{p, q, sd(a.avar_bk), sd(a.avar_mk), sd(a.avar_bu), sd(a.avar_mu), a.v_star[set[0]],
                           a.v_tilde[set[0]], a.differentiable});
  }
  return rows;
}

std::vector<std::pair<double, double>> square_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) fail(ErrorKind::ParamOutOfRange, "grid step must lie in (0, 1]");
  const long long count = std::llround(1.0 / step);
  if (count < 1 || std::abs(static_cast<double>(count) * step - 1.0) > 1e-9) {
    fail(ErrorKind::ParamOutOfRange, "grid step must divide 1");
  }
  std::vector<std::pair<double, double>> out;
  for (long long i = 0; i <= count; ++i) {
    for (long long j = 0; j <= count; ++j) {
      out.emplace_back(static_cast<double>(i) / static_cast<double>(count),
                       static_cast<double>(j) / static_cast<double>(count));
    }
  }
  return out;
}

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "p,q,sd_bk,sd_mk,sd_bu,sd_mu,v1_star,v1_tilde\n";
  for (const GridRow& r : rows) {
    out << format_double(r.p) << ',' << format_double(r.q) << ',' << format_double(r.sd_bk) << ','
        << format_double(r.sd_mk) << ',' << format_double(r.sd_bu) << ',' << format_double(r.sd_mu) << ','
        << format_double(r.v1_star) << ',' << format_double(r.v1_tilde) << '\n';
  }
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "method,bias,emp_std,theo_std,excluded\n";
  for (const MethodSummary& s : report.methods) {
    out << to_string(s.method) << ',' << format_double(s.bias) << ',' << format_double(s.emp_std) << ','
        << format_double(s.theo_std) << ',' << s.excluded << '\n';
  }
}

}  // namespace tailmoments
