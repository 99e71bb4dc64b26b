#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tailmoments/maxlinear.hpp"

namespace tailmoments {

enum class Method { BK, MK, BU, MU };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct ExperimentConfig {
  MaxLinearModel model = make_scenario(0.1, 0.2);
  Index n = 1000;
  Index k = 50;
  double u_quantile = 0.95;
  long long reps = 5000;
  std::uint64_t seed = 1;
  /// Defaults to k/n.
  std::optional<double> eps;
  std::vector<Method> estimators{Method::BK, Method::MK, Method::BU, Method::MU};
  /// Defaults to all components.
  std::optional<IndexSet> index_set;
  bool keep_estimates = false;
  /// 0 selects the TAILMOMENTS_THREADS setting, then the hardware count.
  unsigned threads = 0;

  void validate() const;
  IndexSet effective_set() const;
  double effective_eps() const { return eps ? *eps : static_cast<double>(k) / static_cast<double>(n); }
};

struct MethodSummary {
  Method method;
  double bias = 0.0;
  double emp_std = 0.0;
  double theo_std = 0.0;
  double mean = 0.0;
  long long used = 0;
  long long excluded = 0;
  std::vector<double> estimates;
};

struct ExperimentReport {
  double tau_true = 0.0;
  std::vector<MethodSummary> methods;
};

/// -1/ln(q): the unit Frechet q-quantile.
double frechet_quantile(double q);

/// Repetition seed for (cfg.seed, r).
std::uint64_t repetition_seed(std::uint64_t seed, long long rep);

/// Worker count from TAILMOMENTS_THREADS (0 or unset means hardware count).
unsigned worker_count(unsigned requested);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// The canonical scenarios (.1,.2), (.4,.6), (.8,.9).
std::vector<std::pair<double, double>> table_scenarios();

struct GridRow {
  double p;
  double q;
  double sd_bk;
  double sd_mk;
  double sd_bu;
  double sd_mu;
  double v1_star;
  double v1_tilde;
  bool differentiable;
};

std::vector<GridRow> avar_grid(const std::vector<std::pair<double, double>>& grid, const IndexSet& set);

/// Square grid over [0, 1]^2 with the given step (endpoints included).
std::vector<std::pair<double, double>> square_grid(double step);

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows);
void write_report_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace tailmoments
