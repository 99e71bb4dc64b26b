#include <cmath>

#include "doctest.h"
#include "reference.hpp"
#include "tailmoments/estimators.hpp"
#include "tailmoments/maxlinear.hpp"
#include "tailmoments/oracle.hpp"

using namespace tailmoments;

namespace {

const ref::Rows kRows = {{10, 10}, {12, 6}, {0.5, 0.2}, {0.1, 0.3}};

StandardizedMatrix example() { return StandardizedMatrix::assume_standardized(DataMatrix(ref::to_matrix(kRows))); }

StandardizedMatrix full_dependence() {
  Matrix m(5, 2);
  m << 7, 7, 0.3, 0.3, 12, 12, 4, 4, 25, 25;
  return StandardizedMatrix::assume_standardized(DataMatrix(m));
}

WeightVector w2(double a, double b) {
  Vector v(2);
  v << a, b;
  return make_weight_vector(v, IndexSet::full(2));
}

const IndexSet kPair = IndexSet::full(2);

DataMatrix crossing() {
  Matrix m(4, 2);
  m << 4, 1, 3, 2, 2, 3, 1, 4;
  return DataMatrix(m);
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidData;
}

}  // namespace

TEST_CASE("generalized moment estimator on four rows") {
  const Perturbation unit = Perturbation::unit(kPair, 2);
  CHECK(m_hat(example(), 5.0, w2(1, 1), unit, 1) == doctest::Approx(0.4375).epsilon(1e-15));
  CHECK(m_hat(example(), 100.0, w2(1, 1), unit, 3) == 0.0);
  CHECK(m_hat(example(), 5.0, w2(1, 1), unit, 0) == 0.5);
  CHECK(p_hat(example(), 5.0, unit) == 0.5);
  CHECK(p_hat(example(), 11.0, unit) == 0.25);
  CHECK(p_hat(example(), 100.0, unit) == 0.0);
}

TEST_CASE("generalized estimator with scaling and power") {
  Vector s(2);
  s << 0.5, 1.2;
  const Perturbation pert(s, 1.25);
  const StandardizedMatrix x = example();
  // (10,10) -> (5,12), (12,6) -> (6,7.2); both exceed u = 5.
  const double a1 = std::pow(5.0 / 12.0, 0.8) * 0.3 + 1.0 * 0.7;
  const double a2 = std::pow(6.0 / 7.2, 0.8) * 0.3 + 1.0 * 0.7;
  CHECK(m_hat(x, 5.0, w2(0.3, 0.7), pert, 2) == doctest::Approx((a1 * a1 + a2 * a2) / 4).epsilon(1e-14));
  CHECK(p_hat(x, 5.0, pert) == 0.5);
  CHECK(p_hat(x, 6.5, pert) == 0.5);
  CHECK(p_hat(x, 7.5, pert) == 0.25);
}

TEST_CASE("known-margin moment ratio") {
  const StandardizedMatrix x = example();
  const EstimateReport r = moment_ratio_known(x, 5.0, kPair, w2(1, 1), 1);
  CHECK(r.estimate == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(*r.inverse_estimate == doctest::Approx(1 / 0.875).epsilon(1e-15));
  CHECK(r.exceedance_count == 2);
  // Angular combos 1 and 0.75: variance 0.015625 over 2 exceedances.
  CHECK(*r.std_error == doctest::Approx(std::sqrt(0.015625 / 2)).epsilon(1e-14));

  CHECK(moment_ratio_known(x, 5.0, kPair, w2(1, 1), 0).estimate == 1.0);
  CHECK(moment_ratio_known(full_dependence(), 5.0, kPair, w2(0.3, 0.7), 1).estimate == doctest::Approx(1.0));
  CHECK(kind_of([&] { moment_ratio_known(x, 50.0, kPair, w2(1, 1), 1); }) == ErrorKind::NoExceedances);
  CHECK(kind_of([&] { moment_ratio_known(x, 5.0, IndexSet::from_one_based({1}), w2(1, 1), 1); }) ==
        ErrorKind::SupportViolation);
}

TEST_CASE("benchmark estimator counts convex-combination exceedances") {
  const StandardizedMatrix x = example();
  CHECK(benchmark_ratio_known(x, 5.0, kPair, w2(1, 0)).estimate == 1.0);
  CHECK(benchmark_ratio_known(x, 11.0, kPair, w2(1, 1)).estimate == 0.0);
  CHECK(benchmark_ratio_known(full_dependence(), 5.0, kPair, w2(0.2, 0.8)).estimate == 1.0);
  const EstimateReport r = benchmark_ratio_known(x, 5.0, kPair, w2(1, 1));
  CHECK(r.estimate == 1.0);
  CHECK(*r.std_error == 0.0);
  CHECK(kind_of([&] { benchmark_ratio_known(x, 50.0, kPair, w2(1, 1)); }) == ErrorKind::NoExceedances);
}

TEST_CASE("rank-based moment ratio") {
  const EstimateReport r = moment_ratio_ranks(crossing(), 2, kPair, w2(1, 1), 1, 1.0);
  CHECK(r.estimate == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(r.exceedance_count == 2);
  CHECK(*r.inverse_estimate == doctest::Approx(1.6).epsilon(1e-15));
  CHECK_FALSE(r.std_error.has_value());

  Matrix same(6, 2);
  same << 1, 1, 5, 5, 2, 2, 9, 9, 3, 3, 4, 4;
  for (Index k : {2, 3, 5}) CHECK(moment_ratio_ranks(DataMatrix(same), k, kPair, w2(0.1, 0.9), 1).estimate == 1.0);

  Matrix one(5, 1);
  one << 3, 1, 4, 1.5, 9;
  const WeightVector e = WeightVector::basis(0, 1);
  CHECK(moment_ratio_ranks(DataMatrix(one), 3, IndexSet::full(1), e, 1).estimate == 1.0);
  CHECK(kind_of([&] { moment_ratio_ranks(DataMatrix(one), 1, IndexSet::full(1), e, 1, 1.0); }) ==
        ErrorKind::NoExceedances);
  CHECK(kind_of([&] { moment_ratio_ranks(crossing(), 2, kPair, w2(1, 1), 1, -1.0); }) == ErrorKind::NonPositiveAlpha);
}

TEST_CASE("rank ratio agrees with a naive reference") {
  std::mt19937_64 gen(21);
  const auto rows = ref::pareto_rows(gen, 300, 3);
  const DataMatrix x(ref::to_matrix(rows));
  const IndexSet set = IndexSet::from_one_based({1, 3});
  const double inv_alpha = 0.8;
  const auto y = ref::rank_ratios(rows, 30, 1.0);
  Vector w(3);
  w << 0.3, 0.0, 0.7;
  for (int p : {1, 2, 3}) {
    // Angular part (R/l)^{alpha}; the naive reference powers the ratios first.
    double sum = 0.0;
    int count = 0;
    for (const auto& r : y) {
      const double l = std::max(r[0], r[2]);
      if (!(l > 1.0)) continue;
      ++count;
      sum += std::pow(0.3 * std::pow(r[0] / l, 1 / inv_alpha) + 0.7 * std::pow(r[2] / l, 1 / inv_alpha), p);
    }
    const double got =
        moment_ratio_ranks(x, 30, set, make_weight_vector(w, set), static_cast<unsigned>(p), inv_alpha).estimate;
    CHECK(got == doctest::Approx(sum / count).epsilon(1e-13));
  }
}

TEST_CASE("stable tail estimate on small samples") {
  Matrix same(4, 2);
  same << 1, 1, 2, 2, 3, 3, 4, 4;
  const EstimateReport a = stable_tail_estimate(DataMatrix(same), 2, kPair);
  CHECK(a.estimate == 0.5);
  CHECK(*a.inverse_estimate == 2.0);
  CHECK_FALSE(a.std_error.has_value());

  Matrix one(6, 1);
  one << 6, 2, 5, 1, 3, 4;
  for (Index k : {1, 2, 4, 6}) {
    CHECK(stable_tail_estimate(DataMatrix(one), k, IndexSet::full(1)).estimate ==
          doctest::Approx(static_cast<double>(k - 1) / static_cast<double>(k)));
  }
  CHECK(stable_tail_estimate(crossing(), 2, kPair).estimate == 1.0);
  CHECK(kind_of([&] { stable_tail_estimate(crossing(), 5, kPair); }) == ErrorKind::KOutOfRange);
}

TEST_CASE("stable tail standard error tracks the asymptotic variance") {
  const MaxLinearModel model = make_scenario(0.4, 0.6);
  const DiscreteSpectralMeasure mu = model_spectral_measure(model);
  const double avar = oracle_avars(mu, kPair).avar_bu;
  const Index n = 200000;
  const Index k = 4000;
  const DataMatrix x = simulate(model, n, 17);
  const EstimateReport r = stable_tail_estimate(x, k, kPair, 0.05);
  REQUIRE(r.std_error.has_value());
  CHECK(*r.std_error == doctest::Approx(std::sqrt(avar / k)).epsilon(0.2));
}

TEST_CASE("p = 1 moment ratios are affine in the weights") {
  std::mt19937_64 gen(33);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  const auto rows = ref::pareto_rows(gen, 500, 3);
  const DataMatrix raw(ref::to_matrix(rows));
  const StandardizedMatrix x = StandardizedMatrix::assume_standardized(raw);
  const IndexSet set = IndexSet::full(3);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const WeightVector v = weights_on(ref::random_simplex(gen, 3), set, 3);
    const WeightVector w = weights_on(ref::random_simplex(gen, 3), set, 3);
    const double l = lam(gen);
    const WeightVector mix = make_weight_vector(l * v.weights() + (1 - l) * w.weights(), set);
    const double known = moment_ratio_known(x, 8.0, set, mix, 1).estimate;
    const double known_lin =
        l * moment_ratio_known(x, 8.0, set, v, 1).estimate + (1 - l) * moment_ratio_known(x, 8.0, set, w, 1).estimate;
    const double rank = moment_ratio_ranks(raw, 40, set, mix, 1).estimate;
    const double rank_lin =
        l * moment_ratio_ranks(raw, 40, set, v, 1).estimate + (1 - l) * moment_ratio_ranks(raw, 40, set, w, 1).estimate;
    worst = std::max({worst, std::abs(known - known_lin), std::abs(rank - rank_lin)});
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("moment ratios and exceedance fractions stay in the unit interval") {
  std::mt19937_64 gen(41);
  const auto rows = ref::pareto_rows(gen, 300, 2);
  const StandardizedMatrix x = StandardizedMatrix::assume_standardized(DataMatrix(ref::to_matrix(rows)));
  for (int rep = 0; rep < 50; ++rep) {
    const WeightVector v = weights_on(ref::random_simplex(gen, 2), kPair, 2);
    for (unsigned p : {1u, 2u, 5u}) {
      const double r = moment_ratio_known(x, 3.0, kPair, v, p).estimate;
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
    const double b = benchmark_ratio_known(x, 3.0, kPair, v).estimate;
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
  const double ph = p_hat(x, 2.0, Perturbation::unit(kPair, 2));
  CHECK(ph >= 0.0);
  CHECK(ph <= 1.0);
}

TEST_CASE("rank pipeline equals the generalized estimator at the order-statistic scaling") {
  std::mt19937_64 gen(55);
  const DataMatrix raw = simulate(make_scenario(0.3, 0.7), 2000, 99);
  const StandardizedMatrix x = StandardizedMatrix::assume_standardized(raw);
  const IndexSet set = kPair;
  const Index k = 100;
  const double u = 20.0;
  Vector s = Vector::Zero(2);
  for (Index i = 0; i < 2; ++i) s(i) = u / ref::kth_largest(std::vector<double>(raw.values().col(i).data(), raw.values().col(i).data() + raw.n()), static_cast<int>(k));
  const Perturbation pert(s, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const WeightVector v = weights_on(ref::random_simplex(gen, 2), set, 2);
    for (unsigned p : {1u, 2u}) {
      const double lhs = moment_ratio_ranks(raw, k, set, v, p, 1.0).estimate;
      const double rhs = m_hat(x, u, v, pert, p) / p_hat(x, u, pert);
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
  }
}
