#include "tailmoments/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tailmoments/estimators.hpp"
#include "tailmoments/harness.hpp"
#include "tailmoments/io.hpp"
#include "tailmoments/margins.hpp"
#include "tailmoments/maxlinear.hpp"
#include "tailmoments/oracle.hpp"
#include "tailmoments/weights.hpp"

namespace tailmoments {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

std::vector<double> parse_reals(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + tok + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

IndexSet parse_index_set(const std::string& s) {
  std::vector<long long> members;
  for (double x : parse_reals(s, "--index-set")) {
    if (x != std::floor(x)) throw UsageError("--index-set: indices must be integers");
    members.push_back(static_cast<long long>(x));
  }
  return IndexSet::from_one_based(members);
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& flag) {
  const auto v = parse_reals(s, flag);
  if (v.size() != 2) throw UsageError(flag + " expects two values p,q");
  return {v[0], v[1]};
}

std::string fixed_digits(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) fail(ErrorKind::ParseError, "cannot write '" + path + "'");
  f << text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

WeightVector weights_from_flag(const std::string& s, const IndexSet& set, Index d) {
  const auto w = parse_reals(s, "--weights");
  Vector raw(static_cast<Index>(w.size()));
  for (std::size_t a = 0; a < w.size(); ++a) raw(static_cast<Index>(a)) = w[a];
  if (raw.size() == static_cast<Index>(set.size())) return weights_on(raw, set, d);
  if (raw.size() == d) return make_weight_vector(raw, set);
  throw UsageError("--weights needs one value per member of the index set");
}

struct EstimateArgs {
  std::string input;
  std::string index_set;
  bool known = false;
  double alpha = 1.0;
  std::string scales;
  double u_quantile = 0.95;
  std::optional<double> u;
  std::optional<long long> k;
  std::string weights;
  bool optimal = false;
  unsigned p = 1;
  std::optional<double> eps;
  std::string method;
  std::string output = "json";
};

EstimateReport flip_to_inverse(EstimateReport rep, const std::string& label) {
  if (!rep.inverse_estimate) fail(ErrorKind::NoExceedances, "stable-tail estimate is zero");
  std::swap(rep.estimate, *rep.inverse_estimate);
  rep.method = label;
  return rep;
}

std::string run_estimate(const EstimateArgs& a) {
  const DataMatrix data = read_csv_file(a.input);
  const IndexSet set = parse_index_set(a.index_set);
  set.check_dimension(data.d());
  const std::string method = a.method.empty() ? (a.known ? "mk" : "mu") : a.method;
  const bool needs_known = method == "bk" || method == "mk";
  if (needs_known && !a.known) throw UsageError("--method " + method + " requires --known-margins");
  if (a.optimal && !a.weights.empty()) throw UsageError("--weights and --optimal are exclusive");

  const Index k = a.k ? static_cast<Index>(*a.k) : std::max<Index>(1, data.n() / 20);
  const double eps = a.eps ? *a.eps : static_cast<double>(k) / static_cast<double>(data.n());
  const Index d = data.d();
  auto given = [&]() -> std::optional<WeightVector> {
    if (a.weights.empty()) return std::nullopt;
    return weights_from_flag(a.weights, set, d);
  };

  EstimateReport rep;
  if (a.known && method != "hill" && method != "stdf" && method != "bu" && method != "mu") {
    Vector scales = Vector::Ones(d);
    if (!a.scales.empty()) {
      const auto r = parse_reals(a.scales, "--scales");
      if (static_cast<Index>(r.size()) != d) throw UsageError("--scales needs one value per column");
      for (Index i = 0; i < d; ++i) scales(i) = r[static_cast<std::size_t>(i)];
    }
    const StandardizedMatrix x = standardize_known(data, a.alpha, scales);
    if (!(a.u_quantile > 0.0 && a.u_quantile < 1.0)) throw UsageError("--u-quantile must lie in (0, 1)");
    const double u = a.u ? *a.u : frechet_quantile(a.u_quantile);
    const auto w = given();
    if (method == "bk") {
      rep = benchmark_ratio_known(x, u, set, w ? *w : WeightVector::uniform(set, d));
      rep.method = "BK";
    } else if (method == "mk") {
      if (w) {
        rep = moment_ratio_known(x, u, set, *w, 1);
        rep.method = "MK";
      } else {
        rep = tau_mk(x, u, set);
      }
    } else if (method == "moment") {
      const WeightVector v = w ? *w : a.optimal ? optimal_weights_known(x, u, set) : WeightVector::uniform(set, d);
      rep = moment_ratio_known(x, u, set, v, a.p);
    } else {
      throw UsageError("unknown --method '" + method + "'");
    }
    return a.output == "csv" ? to_csv(rep) : to_json(rep).dump(2) + "\n";
  }

  const auto w = given();
  if (method == "hill") {
    rep = hill_inverse_alpha(data, k, set);
  } else if (method == "stdf") {
    rep = stable_tail_estimate(data, k, set, a.eps);
  } else if (method == "bu") {
    rep = flip_to_inverse(stable_tail_estimate(data, k, set, eps), "BU");
  } else if (method == "mu") {
    if (w) {
      rep = moment_ratio_ranks(data, k, set, *w, 1);
      rep.method = "MU";
    } else {
      rep = tau_mu(data, k, set, eps);
    }
  } else if (method == "moment") {
    WeightVector v = WeightVector::uniform(set, d);
    if (w) {
      v = *w;
    } else if (a.optimal) {
      v = minimize_quadratic_on_simplex(build_gtilde(data, k, set, eps));
    }
    rep = moment_ratio_ranks(data, k, set, v, a.p);
  } else {
    throw UsageError("unknown --method '" + method + "'");
  }
  return a.output == "csv" ? to_csv(rep) : to_json(rep).dump(2) + "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment-based estimators of extremal dependence"};
  app.require_subcommand(1);

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate from a CSV data file");
  est->add_option("--input", ea.input, "CSV file")->required();
  est->add_option("--index-set", ea.index_set, "1-based components, e.g. 1,2")->required();
  est->add_flag("--known-margins", ea.known, "Standardize with known alpha and scales");
  est->add_option("--alpha", ea.alpha, "Tail index for known margins");
  est->add_option("--scales", ea.scales, "Scales r1,...,rd for known margins");
  est->add_option("--u-quantile", ea.u_quantile, "Threshold as a unit Frechet quantile")->capture_default_str();
  est->add_option("--u", ea.u, "Threshold on the standardized scale (overrides --u-quantile)");
  est->add_option("--k", ea.k, "Number of upper order statistics (default n/20)");
  est->add_option("--weights", ea.weights, "Convex weights on the index set");
  est->add_flag("--optimal", ea.optimal, "Use variance-optimal weights");
  est->add_option("--p", ea.p, "Moment order")->capture_default_str();
  est->add_option("--eps", ea.eps, "Difference-quotient step (default k/n)");
  est->add_option("--method", ea.method, "bk|mk|bu|mu|moment|hill|stdf")
      ->check(CLI::IsMember({"bk", "mk", "bu", "mu", "moment", "hill", "stdf"}));
  est->add_option("--output", ea.output, "json|csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  std::string sim_model, sim_scenario, sim_output;
  long long sim_n = 0;
  std::uint64_t sim_seed = 0;
  bool sim_header = false;
  auto* sim = app.add_subcommand("simulate", "Simulate a max-linear model to CSV");
  auto* sim_m = sim->add_option("--model", sim_model, "Model JSON {\"coeffs\": ...}");
  auto* sim_s = sim->add_option("--scenario", sim_scenario, "Bivariate scenario p,q");
  sim_m->excludes(sim_s);
  sim->add_option("--n", sim_n, "Sample size")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "64-bit seed")->required();
  sim->add_option("--output", sim_output, "CSV file (default stdout)");
  sim->add_flag("--header", sim_header, "Write an X1,...,Xd header");

  std::string or_measure, or_scenario, or_set, or_c;
  bool or_avars = false, or_tau = false, or_opt = false;
  int or_digits = 8;
  auto* orc = app.add_subcommand("oracle", "Exact values for a discrete spectral measure");
  auto* or_m = orc->add_option("--measure", or_measure, "Measure JSON {\"atoms\": ..., \"probs\": ...}");
  auto* or_s = orc->add_option("--scenario", or_scenario, "Bivariate scenario p,q");
  or_m->excludes(or_s);
  orc->add_option("--index-set", or_set, "1-based components (default all)");
  auto* f1 = orc->add_flag("--avars", or_avars, "Four asymptotic variances and optimal weights");
  auto* f2 = orc->add_flag("--tau", or_tau, "Extremal coefficient tau_I");
  auto* f3 = orc->add_flag("--optimal-weights", or_opt, "v* and f(v*)");
  auto* f4 = orc->add_option("--c", or_c, "c(v,s,beta,p) given as \"v1,..;s1,..;beta;p\"");
  orc->add_option("--digits", or_digits, "Significant digits for scalar output")->capture_default_str();
  for (auto* a : {f1, f2, f3, f4}) {
    for (auto* b : {f1, f2, f3, f4}) {
      if (a != b) a->excludes(b);
    }
  }

  std::string ex_config, ex_output;
  bool ex_table = false;
  std::optional<long long> ex_reps;
  std::optional<std::uint64_t> ex_seed;
  unsigned ex_threads = 0;
  auto* ex = app.add_subcommand("experiment", "Monte Carlo experiment");
  auto* ex_c = ex->add_option("--config", ex_config, "ExperimentConfig JSON");
  auto* ex_t = ex->add_flag("--table1", ex_table, "The three canonical bivariate scenarios");
  ex_c->excludes(ex_t);
  ex->add_option("--reps", ex_reps, "Override repetitions");
  ex->add_option("--seed", ex_seed, "Override seed");
  ex->add_option("--threads", ex_threads, "Worker threads (0 = TAILMOMENTS_THREADS or all cores)");
  ex->add_option("--output", ex_output, "Report file, .json or .csv (default JSON to stdout)");

  double gr_step = 0.0;
  std::string gr_output, gr_set = "1,2";
  auto* gr = app.add_subcommand("grid", "Asymptotic standard deviations on a (p,q) grid");
  gr->add_option("--pq-grid", gr_step, "Grid step dividing 1, e.g. 0.05")->required();
  gr->add_option("--index-set", gr_set, "1-based components")->capture_default_str();
  gr->add_option("--output", gr_output, "CSV file (default stdout)");

  std::vector<const char*> argv{"tailmoments"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*est) {
      out << run_estimate(ea);
    } else if (*sim) {
      if (sim_model.empty() == sim_scenario.empty()) throw UsageError("give exactly one of --model or --scenario");
      const MaxLinearModel model = sim_model.empty() ? make_scenario(parse_pair(sim_scenario, "--scenario").first,
                                                                     parse_pair(sim_scenario, "--scenario").second)
                                                     : model_from_json(read_json_file(sim_model));
      const DataMatrix x = simulate(model, static_cast<Index>(sim_n), sim_seed);
      std::ostringstream os;
      write_csv(os, x.values(), sim_header);
      emit(out, sim_output, os.str());
    } else if (*orc) {
      if (or_measure.empty() == or_scenario.empty()) throw UsageError("give exactly one of --measure or --scenario");
      const DiscreteSpectralMeasure measure =
          or_measure.empty()
              ? model_spectral_measure(make_scenario(parse_pair(or_scenario, "--scenario").first,
                                                     parse_pair(or_scenario, "--scenario").second))
              : measure_from_json(read_json_file(or_measure));
      const IndexSet set = or_set.empty() ? IndexSet::full(measure.dim()) : parse_index_set(or_set);
      set.check_dimension(measure.dim());
      if (or_tau) {
        out << fixed_digits(oracle_tau(measure, set), or_digits) << '\n';
      } else if (or_opt) {
        const OptimalWeights ow = oracle_optimal_weights(measure, set);
        const Vector w = ow.weights.restricted(set);
        Json j;
        j["v_star"] = std::vector<double>(w.data(), w.data() + w.size());
        j["objective"] = ow.objective;
        out << j.dump(2) << '\n';
      } else if (!or_c.empty()) {
        const auto parts = split(or_c, ';');
        if (parts.size() != 4) throw UsageError("--c expects \"v;s;beta;p\"");
        const auto v = parse_reals(parts[0], "--c v");
        const auto s = parse_reals(parts[1], "--c s");
        const auto beta = parse_reals(parts[2], "--c beta");
        const auto p = parse_reals(parts[3], "--c p");
        const Index d = measure.dim();
        if (static_cast<Index>(v.size()) != d || static_cast<Index>(s.size()) != d) {
          throw UsageError("--c: v and s need one value per component");
        }
        if (beta.size() != 1 || p.size() != 1 || p[0] < 0 || p[0] != std::floor(p[0])) {
          throw UsageError("--c: beta is one real and p one non-negative integer");
        }
        Vector vv(d), ss(d);
        std::vector<Index> supp;
        for (Index i = 0; i < d; ++i) {
          vv(i) = v[static_cast<std::size_t>(i)];
          ss(i) = s[static_cast<std::size_t>(i)];
          if (vv(i) != 0.0) supp.push_back(i);
        }
        if (supp.empty()) fail(ErrorKind::ZeroSum, "weights sum to zero");
        const WeightVector wv = make_weight_vector(vv, IndexSet::from_zero_based(supp));
        const double c = oracle_c(measure, wv, Perturbation(ss, beta[0]), static_cast<unsigned>(p[0]));
        out << fixed_digits(c, or_digits) << '\n';
      } else {
        out << to_json(oracle_avars(measure, set), set).dump(2) << '\n';
      }
    } else if (*ex) {
      if (ex_config.empty() == !ex_table) throw UsageError("give exactly one of --config or --table1");
      std::vector<std::pair<std::pair<double, double>, ExperimentConfig>> runs;
      if (ex_table) {
        for (const auto& pq : table_scenarios()) {
          ExperimentConfig cfg;
          cfg.model = make_scenario(pq.first, pq.second);
          runs.emplace_back(pq, cfg);
        }
      } else {
        runs.emplace_back(std::pair<double, double>{std::nan(""), std::nan("")},
                          config_from_json(read_json_file(ex_config)));
      }
      Json all = Json::array();
      std::ostringstream csv;
      if (ex_table) csv << "p,q,";
      csv << "method,bias,emp_std,theo_std,excluded\n";
      for (auto& [pq, cfg] : runs) {
        if (ex_reps) cfg.reps = *ex_reps;
        if (ex_seed) cfg.seed = *ex_seed;
        if (ex_threads) cfg.threads = ex_threads;
        const ExperimentReport rep = run_experiment(cfg);
        Json j = to_json(rep);
        j["n"] = cfg.n;
        j["k"] = cfg.k;
        j["u_quantile"] = cfg.u_quantile;
        j["reps"] = cfg.reps;
        j["seed"] = cfg.seed;
        j["eps"] = cfg.effective_eps();
        if (ex_table) {
          j["p"] = pq.first;
          j["q"] = pq.second;
        }
        all.push_back(j);
        std::ostringstream block;
        write_report_csv(block, rep);
        std::istringstream lines(block.str());
        std::string line;
        std::getline(lines, line);
        while (std::getline(lines, line)) {
          if (ex_table) csv << format_double(pq.first) << ',' << format_double(pq.second) << ',';
          csv << line << '\n';
        }
      }
      Json doc = ex_table ? Json{{"scenarios", all}} : all[0];
      emit(out, ex_output, ends_with(ex_output, ".csv") ? csv.str() : doc.dump(2) + "\n");
    } else if (*gr) {
      const IndexSet set = parse_index_set(gr_set);
      std::ostringstream os;
      write_grid_csv(os, avar_grid(square_grid(gr_step), set));
      emit(out, gr_output, os.str());
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace tailmoments
