// Acceptance checks 1-8. `acceptance N` runs one criterion, no argument runs all.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "reference.hpp"
#include "tailmoments/estimators.hpp"
#include "tailmoments/harness.hpp"
#include "tailmoments/margins.hpp"
#include "tailmoments/maxlinear.hpp"
#include "tailmoments/oracle.hpp"
#include "tailmoments/weights.hpp"

using namespace tailmoments;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Printed rows of the simulation table, ordered BK, MK, BU, MU.
struct TableBlock {
  double p, q;
  double bias[4];
  double std[4];
  double theo[4];
};

const TableBlock kTable[3] = {
    {0.1, 0.2, {0.026, 0.019, 0.024, 0.013}, {0.053, 0.011, 0.021, 0.015}, {0.053, 0.003, 0.019, 0.015}},
    {0.4, 0.6, {0.009, 0.013, 0.023, 0.002}, {0.054, 0.017, 0.032, 0.022}, {0.053, 0.006, 0.031, 0.021}},
    {0.8, 0.9, {0.002, 0.008, 0.021, -0.003}, {0.036, 0.008, 0.025, 0.012}, {0.036, 0.003, 0.024, 0.010}},
};

const char* kNames[4] = {"BK", "MK", "BU", "MU"};

const IndexSet kPair = IndexSet::full(2);

bool report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d %s: %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  return ok;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

bool criterion1() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const TableBlock& b : kTable) {
    const OracleAvars a = oracle_avars(model_spectral_measure(make_scenario(b.p, b.q)), kPair);
    const double avar[4] = {a.avar_bk, a.avar_mk, a.avar_bu, a.avar_mu};
    detail += "(" + fmt("%.1f", b.p) + "," + fmt("%.1f", b.q) + ")";
    for (int m = 0; m < 4; ++m) {
      const double sd = std::sqrt(avar[m] / 50.0);
      const bool hit = std::abs(round3(sd) - b.theo[m]) < 1e-9;
      ok = ok && hit;
      detail += std::string(" ") + kNames[m] + "=" + fmt("%.5f", sd) + (hit ? "" : "(want " + fmt("%.3f", b.theo[m]) + ")");
    }
    detail += ";";
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 1.0;
  return report(1, ok, detail + " time " + fmt("%.3f", elapsed) + "s");
}

// Bias of MK and MU when the fitted weights are read in swapped order.
void reflected_weight_diagnostic(long long reps) {
  for (const TableBlock& b : kTable) {
    const MaxLinearModel model = make_scenario(b.p, b.q);
    const double truth = 1.0 / oracle_tau(model_spectral_measure(model), kPair);
    const double u = frechet_quantile(0.95);
    double sum_mk = 0.0, sum_mu = 0.0;
    long long used_mk = 0, used_mu = 0;
    for (long long r = 0; r < reps; ++r) {
      const DataMatrix x = simulate(model, 1000, repetition_seed(1, r));
      const StandardizedMatrix xs = StandardizedMatrix::assume_standardized(x);
      try {
        const EstimateReport mk = tau_mk(xs, u, kPair);
        Vector w(2);
        w << mk.parameters.at("w2"), mk.parameters.at("w1");
        sum_mk += moment_ratio_known(xs, u, kPair, make_weight_vector(w, kPair), 1).estimate;
        ++used_mk;
      } catch (const Error&) {
      }
      try {
        const EstimateReport mu = tau_mu(x, 50, kPair, 0.05);
        Vector w(2);
        w << mu.parameters.at("w2"), mu.parameters.at("w1");
        sum_mu += moment_ratio_ranks(x, 50, kPair, make_weight_vector(w, kPair), 1).estimate;
        ++used_mu;
      } catch (const Error&) {
      }
    }
    std::printf("  info (%.1f,%.1f) swapped-weight bias MK=%.4f (printed %.3f) MU=%.4f (printed %.3f)\n", b.p, b.q,
                sum_mk / static_cast<double>(used_mk) - truth, b.bias[1], sum_mu / static_cast<double>(used_mu) - truth,
                b.bias[3]);
  }
}

bool criterion2() {
  const auto t0 = Clock::now();
  bool std_ok = true;
  bool bias_ok = true;
  for (const TableBlock& b : kTable) {
    ExperimentConfig cfg;
    cfg.model = make_scenario(b.p, b.q);
    cfg.n = 1000;
    cfg.k = 50;
    cfg.u_quantile = 0.95;
    cfg.reps = 5000;
    cfg.seed = 1;
    const ExperimentReport r = run_experiment(cfg);
    for (int m = 0; m < 4; ++m) {
      const MethodSummary& s = r.methods[static_cast<std::size_t>(m)];
      const bool sd_hit = std::abs(s.emp_std - b.std[m]) <= 0.15 * b.std[m];
      const bool bias_hit = std::abs(s.bias - b.bias[m]) <= 0.005;
      std_ok = std_ok && sd_hit;
      bias_ok = bias_ok && bias_hit;
      std::printf("  (%.1f,%.1f) %s std %.4f vs %.3f %s, bias %.4f vs %.3f %s, excluded %lld\n", b.p, b.q, kNames[m],
                  s.emp_std, b.std[m], sd_hit ? "ok" : "off", s.bias, b.bias[m], bias_hit ? "ok" : "off", s.excluded);
    }
  }
  const double elapsed = seconds_since(t0);
  reflected_weight_diagnostic(5000);
  const bool ok = std_ok && bias_ok && elapsed <= 600.0;
  return report(2, ok,
                std::string("std within 15% ") + (std_ok ? "yes" : "no") + ", bias within 0.005 " +
                    (bias_ok ? "yes" : "no") + ", time " + fmt("%.1f", elapsed) + "s");
}

bool criterion3() {
  bool order = true;
  bool degenerate = true;
  double worst = -1e300;
  for (int a = 0; a <= 20; ++a) {
    for (int c = 0; c <= 20; ++c) {
      const double p = a / 20.0;
      const double q = c / 20.0;
      const OracleAvars v = oracle_avars(model_spectral_measure(make_scenario(p, q)), kPair);
      worst = std::max({worst, v.avar_mk - v.avar_mu, v.avar_mu - v.avar_bu, v.avar_bu - v.avar_bk});
      if (v.avar_mk > v.avar_mu + 1e-12 || v.avar_mu > v.avar_bu + 1e-12 || v.avar_bu > v.avar_bk + 1e-12) {
        order = false;
      }
      if (a == c && v.avar_mk != 0.0) degenerate = false;
      if (a == 20 && c == 20 && (v.avar_bk != 0.0 || v.avar_mk != 0.0 || v.avar_bu != 0.0 || v.avar_mu != 0.0)) {
        degenerate = false;
      }
      if (a == 0 && c == 0 && (v.avar_mk != 0.0 || v.avar_mu != 0.0)) degenerate = false;
    }
  }
  return report(3, order && degenerate,
                "441 grid points, largest ordering excess " + fmt("%.3g", worst) + ", degeneracies " +
                    (degenerate ? "exact" : "violated"));
}

Matrix random_cpd(std::mt19937_64& gen, Index m) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix b(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) b(i, j) = z(gen);
  }
  Vector c(m);
  for (Index i = 0; i < m; ++i) c(i) = z(gen);
  return b * b.transpose() + 0.1 * Matrix::Identity(m, m) + c * Vector::Ones(m).transpose() +
         Vector::Ones(m) * c.transpose();
}

bool criterion4() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> uu(1.5, 20.0);
  double quad_gap = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Index d = 2 + rep % 3;
    const StandardizedMatrix x =
        StandardizedMatrix::assume_standardized(DataMatrix(ref::to_matrix(ref::pareto_rows(gen, 300, static_cast<int>(d)))));
    const IndexSet set = IndexSet::full(d);
    const double u = uu(gen);
    const Vector w = ref::random_simplex(gen, d);
    const double lhs = moment_ratio_known(x, u, set, weights_on(w, set, d), 2).estimate;
    quad_gap = std::max(quad_gap, std::abs(lhs - second_moment_matrix_known(x, u, set)(w)));
  }

  double beat = 1e300;
  double closed_gap = 0.0;
  int closed_checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Index m = 2 + rep % 5;
    const Matrix a = random_cpd(gen, m);
    const SimplexSolution s = solve_simplex_qp(a);
    for (Index i = 0; i < m; ++i) beat = std::min(beat, a(i, i) - s.objective);
    for (int t = 0; t < 1000; ++t) {
      const Vector w = ref::random_simplex(gen, m);
      beat = std::min(beat, w.dot(a * w) - s.objective);
    }
  }
  // Bivariate closed form on forms whose minimizer is interior.
  while (closed_checked < 100) {
    const Matrix a = random_cpd(gen, 2);
    const double t = (a(1, 1) - a(0, 1)) / (a(0, 0) + a(1, 1) - 2 * a(0, 1));
    if (!(t > 0.0 && t < 1.0)) continue;
    closed_gap = std::max(closed_gap, std::abs(solve_simplex_qp(a).weights(0) - t));
    ++closed_checked;
  }
  const bool ok = quad_gap <= 1e-12 && beat >= -1e-10 && closed_gap <= 1e-12;
  return report(4, ok,
                "quadratic-form gap " + fmt("%.3g", quad_gap) + ", minimizer margin " + fmt("%.3g", beat) +
                    ", closed-form gap " + fmt("%.3g", closed_gap));
}

bool criterion5() {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  const DataMatrix raw = simulate(make_scenario(0.3, 0.7), 2000, 4);
  const StandardizedMatrix x = StandardizedMatrix::assume_standardized(raw);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const WeightVector v = weights_on(ref::random_simplex(gen, 2), kPair, 2);
    const WeightVector w = weights_on(ref::random_simplex(gen, 2), kPair, 2);
    const double l = lam(gen);
    const WeightVector mix = make_weight_vector(l * v.weights() + (1 - l) * w.weights(), kPair);
    const double known = moment_ratio_known(x, 20.0, kPair, mix, 1).estimate -
                         (l * moment_ratio_known(x, 20.0, kPair, v, 1).estimate +
                          (1 - l) * moment_ratio_known(x, 20.0, kPair, w, 1).estimate);
    const double ranks = moment_ratio_ranks(raw, 100, kPair, mix, 1).estimate -
                         (l * moment_ratio_ranks(raw, 100, kPair, v, 1).estimate +
                          (1 - l) * moment_ratio_ranks(raw, 100, kPair, w, 1).estimate);
    worst = std::max({worst, std::abs(known), std::abs(ranks)});
  }
  return report(5, worst <= 1e-12, "max affine deviation " + fmt("%.3g", worst) + " over 100 convex pairs");
}

bool criterion6() {
  bool ok = true;
  std::string detail;
  const Index n = 10000;
  const Index k = 200;
  for (double alpha : {0.5, 1.0, 2.0}) {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Matrix col(n, 1);
      for (Index i = 0; i < n; ++i) {
        const double z = -1.0 / std::log(counter_uniform(seed, static_cast<std::uint64_t>(i), 0));
        col(i, 0) = std::pow(z, 1.0 / alpha);
      }
      const double inv = hill_inverse_alpha(DataMatrix(col), k, IndexSet::full(1)).estimate;
      if (std::abs(inv - 1.0 / alpha) <= 4.0 / (alpha * std::sqrt(static_cast<double>(k)))) ++hits;
    }
    ok = ok && hits >= 95;
    detail += "alpha " + fmt("%g", alpha) + ": " + std::to_string(hits) + "/100; ";
  }
  return report(6, ok, detail);
}

bool criterion7() {
  std::mt19937_64 gen(99);
  double worst = 0.0;
  const double u = 20.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DataMatrix raw = simulate(make_scenario(0.2, 0.6), 3000, seed);
    const StandardizedMatrix x = StandardizedMatrix::assume_standardized(raw);
    const Index k = 60 + static_cast<Index>(seed) * 10;
    const OrderStatistics os = upper_order_statistics(raw, k);
    Vector s(2);
    for (Index i = 0; i < 2; ++i) s(i) = u / os.thresholds(i);
    const Perturbation pert(s, 1.0);
    for (int t = 0; t < 10; ++t) {
      const WeightVector v = weights_on(ref::random_simplex(gen, 2), kPair, 2);
      for (unsigned p : {1u, 2u, 3u}) {
        const double lhs = moment_ratio_ranks(raw, k, kPair, v, p, 1.0).estimate;
        const double rhs = m_hat(x, u, v, pert, p) / p_hat(x, u, pert);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return report(7, worst <= 1e-12, "max |ranks - generalized| " + fmt("%.3g", worst) + " over 300 cases");
}

bool criterion8() {
  const Index n = 10000;
  const double p = std::exp(-1.0);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto sc = table_scenarios()[seed % 3];
    const DataMatrix x = simulate(make_scenario(sc.first, sc.second), n, seed);
    for (Index j = 0; j < x.d(); ++j) {
      const double frac = static_cast<double>((x.values().col(j).array() <= 1.0).count()) / static_cast<double>(n);
      const double z = std::abs(frac - p) / se;
      worst = std::max(worst, z);
      ok = ok && z <= 4.0;
    }
  }
  return report(8, ok, "largest |P(X<=1) - 1/e| " + fmt("%.2f", worst) + " binomial std errors over 20 seeds");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<bool()>> checks = {criterion1, criterion2, criterion3, criterion4,
                                                     criterion5, criterion6, criterion7, criterion8};
  std::vector<int> ids;
  if (argc > 1) {
    ids.push_back(std::atoi(argv[1]));
  } else {
    for (int i = 1; i <= 8; ++i) ids.push_back(i);
  }
  bool all = true;
  for (int id : ids) {
    if (id < 1 || id > 8) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    try {
      all = checks[static_cast<std::size_t>(id - 1)]() && all;
    } catch (const std::exception& e) {
      all = report(id, false, std::string("exception: ") + e.what()) && all;
    }
  }
  return all ? 0 : 1;
}
