#include "tailmoments/estimators.hpp"

#include <cmath>

#include "tailmoments/margins.hpp"

namespace tailmoments {

namespace {

double ipow(double x, unsigned p) {
  double r = 1.0;
  for (unsigned e = 0; e < p; ++e) r *= x;
  return r;
}

void check_support_within(const WeightVector& v, const IndexSet& set) {
  for (Index i : v.support()) {
    if (!set.contains(i)) fail(ErrorKind::SupportViolation, "weight support must lie inside the index set");
  }
}

void check_dims(const WeightVector& v, Index d) {
  if (v.dim() != d) fail(ErrorKind::InvalidData, "weight vector dimension does not match the data");
}

void check_threshold(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) fail(ErrorKind::ParamOutOfRange, "threshold u must be positive");
}

}  // namespace

MomentSums moment_sums(const Matrix& values, double u, const WeightVector& v, const Perturbation& pert, unsigned p) {
  check_threshold(u);
  const Index d = values.cols();
  check_dims(v, d);
  if (pert.s().size() != d) fail(ErrorKind::InvalidPerturbation, "perturbation dimension does not match the data");
  const IndexSet active = pert.index_set();
  const Vector& s = pert.s();
  const double inv_beta = 1.0 / pert.beta();
  const bool unit_power = pert.beta() == 1.0;

  MomentSums out;
  for (Index l = 0; l < values.rows(); ++l) {
    double norm = 0.0;
    for (Index i : active) norm = std::max(norm, s(i) * values(l, i));
    if (!(norm > u)) continue;
    ++out.exceedances;
    if (p == 0) {
      out.moment_sum += 1.0;
      continue;
    }
    double comb = 0.0;
    for (Index i : v.support()) {
      const double a = s(i) * values(l, i) / norm;
      comb += v[i] * (unit_power ? a : std::pow(a, inv_beta));
    }
    out.moment_sum += ipow(comb, p);
  }
  return out;
}

double m_hat(const StandardizedMatrix& std_data, double u, const WeightVector& v, const Perturbation& pert, unsigned p) {
  const MomentSums sums = moment_sums(std_data.values(), u, v, pert, p);
  return sums.moment_sum / static_cast<double>(std_data.n());
}

double p_hat(const StandardizedMatrix& std_data, double u, const Perturbation& pert) {
  const WeightVector any = WeightVector::basis(pert.index_set()[0], std_data.d());
  return m_hat(std_data, u, any, pert, 0);
}

EstimateReport moment_ratio_known(const StandardizedMatrix& std_data, double u, const IndexSet& set,
                                  const WeightVector& v, unsigned p) {
  check_threshold(u);
  set.check_dimension(std_data.d());
  check_dims(v, std_data.d());
  check_support_within(v, set);

  const Matrix& x = std_data.values();
  double sum = 0.0;
  double sum_sq = 0.0;
  long long count = 0;
  for (Index l = 0; l < x.rows(); ++l) {
    const double norm = ell_norm(x.row(l), set);
    if (!(norm > u)) continue;
    ++count;
    double comb = 0.0;
    for (Index i : v.support()) comb += v[i] * (x(l, i) / norm);
    const double term = ipow(comb, p);
    sum += term;
    sum_sq += term * term;
  }
  if (count == 0) fail(ErrorKind::NoExceedances, "no row with l_I(X*) > u");

  EstimateReport rep;
  rep.method = "moment_known";
  const double cnt = static_cast<double>(count);
  rep.estimate = sum / cnt;
  rep.exceedance_count = count;
  rep.parameters = {{"u", u}, {"p", static_cast<double>(p)}, {"n", static_cast<double>(x.rows())}};
  if (p == 1) {
    if (rep.estimate > 0.0) rep.inverse_estimate = 1.0 / rep.estimate;
    // AVar tau^-1 Var(v^T Theta) on the n / a*(u) scale, and n / a*(u) ~ count / tau.
    const double var = std::max(0.0, sum_sq / cnt - rep.estimate * rep.estimate);
    rep.std_error = std::sqrt(var / cnt);
  }
  return rep;
}

EstimateReport benchmark_ratio_known(const StandardizedMatrix& std_data, double u, const IndexSet& set,
                                     const WeightVector& v) {
  check_threshold(u);
  set.check_dimension(std_data.d());
  check_dims(v, std_data.d());
  check_support_within(v, set);

  const Matrix& x = std_data.values();
  long long num = 0;
  long long den = 0;
  for (Index l = 0; l < x.rows(); ++l) {
    const bool max_exceeds = ell_norm(x.row(l), set) > u;
    double comb = 0.0;
    for (Index i : v.support()) comb += v[i] * x(l, i);
    if (max_exceeds) ++den;
    if (max_exceeds && comb > u) ++num;
  }
  if (den == 0) fail(ErrorKind::NoExceedances, "no row with l_I(X*) > u");

  EstimateReport rep;
  rep.method = "benchmark_known";
  rep.estimate = static_cast<double>(num) / static_cast<double>(den);
  rep.exceedance_count = den;
  rep.parameters = {{"u", u}, {"n", static_cast<double>(x.rows())}, {"numerator_count", static_cast<double>(num)}};
  if (rep.estimate > 0.0) rep.inverse_estimate = 1.0 / rep.estimate;
  // AVar tau^-3 (tau - 1) on the n / a*(u) scale.
  rep.std_error = std::sqrt(rep.estimate * (1.0 - rep.estimate) / static_cast<double>(den));
  return rep;
}

namespace detail {

Matrix rank_transform(const DataMatrix& data, Index k, const IndexSet& set, double alpha_hat) {
  const OrderStatistics os = upper_order_statistics(data, k);
  Matrix y = threshold_ratios(data, os, set);
  if (alpha_hat != 1.0) {
    for (Index i : set) y.col(i) = y.col(i).array().pow(alpha_hat);
  }
  return y;
}

double resolve_inv_alpha(const DataMatrix& data, Index k, const IndexSet& set, std::optional<double> inv_alpha_hat) {
  if (inv_alpha_hat) {
    if (!(*inv_alpha_hat > 0.0) || !std::isfinite(*inv_alpha_hat)) {
      fail(ErrorKind::NonPositiveAlpha, "inverse tail index must be positive");
    }
    return *inv_alpha_hat;
  }
  const EstimateReport hill = hill_inverse_alpha(data, k, set);
  if (!(hill.estimate > 0.0)) fail(ErrorKind::NonPositiveAlpha, "Hill estimate of 1/alpha is not positive");
  return hill.estimate;
}

}  // namespace detail

EstimateReport moment_ratio_ranks(const DataMatrix& data, Index k, const IndexSet& set, const WeightVector& v,
                                  unsigned p, std::optional<double> inv_alpha_hat) {
  set.check_dimension(data.d());
  check_dims(v, data.d());
  check_support_within(v, set);
  const double inv_alpha = detail::resolve_inv_alpha(data, k, set, inv_alpha_hat);
  const double alpha_hat = 1.0 / inv_alpha;

  const OrderStatistics os = upper_order_statistics(data, k);
  const Matrix ratios = threshold_ratios(data, os, set);
  double sum = 0.0;
  long long count = 0;
  for (Index l = 0; l < data.n(); ++l) {
    const double norm = ell_norm(ratios.row(l), set);
    if (!(norm > 1.0)) continue;
    ++count;
    if (p == 0) {
      sum += 1.0;
      continue;
    }
    double comb = 0.0;
    for (Index i : v.support()) comb += v[i] * std::pow(ratios(l, i) / norm, alpha_hat);
    sum += ipow(comb, p);
  }
  if (count == 0) fail(ErrorKind::NoExceedances, "no row with l_I(X / X_{k:n}) > 1");

  EstimateReport rep;
  rep.method = "moment_ranks";
  rep.estimate = sum / static_cast<double>(count);
  rep.exceedance_count = count;
  rep.parameters = {{"k", static_cast<double>(k)},
                    {"n", static_cast<double>(data.n())},
                    {"p", static_cast<double>(p)},
                    {"alpha_hat", alpha_hat}};
  if (p == 1 && rep.estimate > 0.0) rep.inverse_estimate = 1.0 / rep.estimate;
  return rep;
}

EstimateReport stable_tail_estimate(const DataMatrix& data, Index k, const IndexSet& set, std::optional<double> eps,
                                    std::optional<double> inv_alpha_hat) {
  set.check_dimension(data.d());
  const OrderStatistics os = upper_order_statistics(data, k);
  const Matrix ratios = threshold_ratios(data, os, set);
  const double kk = static_cast<double>(k);

  auto count_over = [&](const Matrix& y, const IndexSet& on, const Vector* s) {
    long long c = 0;
    for (Index l = 0; l < y.rows(); ++l) {
      double norm = 0.0;
      for (Index i : on) norm = std::max(norm, (s ? (*s)(i) : 1.0) * y(l, i));
      if (norm > 1.0) ++c;
    }
    return c;
  };

  const long long count = count_over(ratios, set, nullptr);
  EstimateReport rep;
  rep.method = "stdf";
  rep.estimate = static_cast<double>(count) / kk;
  rep.exceedance_count = count;
  rep.parameters = {{"k", kk}, {"n", static_cast<double>(data.n())}};
  if (rep.estimate > 0.0) rep.inverse_estimate = 1.0 / rep.estimate;

  if (eps && rep.estimate > 0.0) {
    if (!(*eps > 0.0 && *eps < 1.0)) fail(ErrorKind::EpsOutOfRange, "eps must lie in (0, 1)");
    const double inv_alpha = detail::resolve_inv_alpha(data, k, set, inv_alpha_hat);
    const Matrix y = detail::rank_transform(data, k, set, 1.0 / inv_alpha);
    const double tau = rep.estimate;
    const Index m = static_cast<Index>(set.size());

    Vector grad(m);
    for (Index a = 0; a < m; ++a) {
      Vector up = Vector::Zero(data.d());
      for (Index i : set) up(i) = 1.0;
      Vector down = up;
      up(set[static_cast<std::size_t>(a)]) += *eps;
      down(set[static_cast<std::size_t>(a)]) -= *eps;
      const double l_up = static_cast<double>(count_over(y, set, &up)) / kk;
      const double l_down = static_cast<double>(count_over(y, set, &down)) / kk;
      grad(a) = (l_up - l_down) / (2.0 * *eps * tau);
    }
    // tau_I E[Theta_i^I ^ Theta_j^I] = 2 - tau_{ij}.
    double quad = 0.0;
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) {
        double two_minus = 1.0;
        if (a != b) {
          const IndexSet pair = IndexSet::pair(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]);
          two_minus = 2.0 - static_cast<double>(count_over(ratios, pair, nullptr)) / kk;
        }
        quad += grad(a) * grad(b) * two_minus;
      }
    }
    double sigma2 = tau * tau * quad - tau;
    if (sigma2 < 0.0) {
      rep.flags.push_back("sigma_L^2 estimate negative; clamped to 0");
      sigma2 = 0.0;
    }
    rep.parameters["eps"] = *eps;
    rep.parameters["sigma_L2"] = sigma2;
    rep.std_error = std::sqrt(sigma2 / (tau * tau * tau * tau * kk));
  }
  return rep;
}

}  // namespace tailmoments
