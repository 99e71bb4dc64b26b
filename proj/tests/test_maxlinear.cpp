#include <cmath>
#include <set>

#include "doctest.h"
#include "tailmoments/maxlinear.hpp"
#include "tailmoments/oracle.hpp"

using namespace tailmoments;

namespace {

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

TEST_CASE("scenario coefficients") {
  const Matrix fd = make_scenario(1, 1).coeffs();
  CHECK(fd == Matrix::Constant(2, 4, 0.25));

  const Matrix ind = make_scenario(0, 0).coeffs();
  Matrix expect(2, 4);
  expect << 0.5, 0, 0.5, 0, 0, 0.5, 0, 0.5;
  CHECK(ind == expect);

  const Matrix s1 = make_scenario(0.1, 0.2).coeffs();
  CHECK(s1(0, 0) == doctest::Approx(1 / 2.3).epsilon(1e-15));
  CHECK(s1(1, 2) == doctest::Approx(0.2 / 2.3).epsilon(1e-15));
  CHECK((make_scenario(0.1, 0.2).row_sums().array() - 1.0).abs().maxCoeff() <= 1e-15);

  CHECK(kind_of([] { make_scenario(-0.1, 0.5); }) == ErrorKind::ParamOutOfRange);
  CHECK(kind_of([] { make_scenario(0.5, 1.1); }) == ErrorKind::ParamOutOfRange);
}

TEST_CASE("models validate their coefficients") {
  Matrix bad(2, 2);
  bad << 0.5, 0.4, 0.5, 0.5;
  CHECK(kind_of([&] { MaxLinearModel m(bad); }) == ErrorKind::InvalidModel);
  bad << 1, 0, 1, 0;
  CHECK(kind_of([&] { MaxLinearModel m(bad); }) == ErrorKind::InvalidModel);
  bad << 1.5, -0.5, 0.5, 0.5;
  CHECK(kind_of([&] { MaxLinearModel m(bad); }) == ErrorKind::InvalidModel);
}

TEST_CASE("spectral measure of a scenario") {
  const DiscreteSpectralMeasure m = model_spectral_measure(make_scenario(0.1, 0.2));
  REQUIRE(m.size() == 4);
  Matrix expect(4, 2);
  expect << 1, 0.1, 0.1, 1, 1, 0.2, 0.2, 1;
  CHECK((m.atoms() - expect).cwiseAbs().maxCoeff() <= 1e-15);
  for (Index a = 0; a < 4; ++a) CHECK(m.probs()(a) == doctest::Approx(0.25).epsilon(1e-15));

  const DiscreteSpectralMeasure fd = model_spectral_measure(make_scenario(1, 1));
  REQUIRE(fd.size() == 1);
  CHECK(fd.atoms() == Matrix::Ones(1, 2));
  CHECK(fd.probs()(0) == doctest::Approx(1.0).epsilon(1e-15));

  for (double p : {0.0, 0.35, 0.7}) {
    for (double q : {0.05, 0.5, 1.0}) {
      const double tau = oracle_tau(model_spectral_measure(make_scenario(p, q)), IndexSet::full(2));
      CHECK(tau == doctest::Approx(4 / (2 + p + q)).epsilon(1e-14));
    }
  }
}

TEST_CASE("counter-based uniforms") {
  std::set<double> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    const double u = counter_uniform(42, r, 3);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    seen.insert(u);
  }
  CHECK(seen.size() == 1000);
  CHECK(counter_uniform(1, 2, 3) == counter_uniform(1, 2, 3));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(1, 3, 2));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(2, 2, 3));
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("simulation is deterministic and keyed by row") {
  const MaxLinearModel model = make_scenario(0.4, 0.6);
  const DataMatrix a = simulate(model, 500, 7);
  const DataMatrix b = simulate(model, 500, 7);
  CHECK(a.values() == b.values());
  const DataMatrix c = simulate(model, 800, 7);
  CHECK(c.values().topRows(500) == a.values());
  CHECK(simulate(model, 500, 8).values() != a.values());
}

TEST_CASE("full dependence gives identical columns") {
  const DataMatrix x = simulate(make_scenario(1, 1), 1000, 3);
  CHECK(x.values().col(0) == x.values().col(1));
}

TEST_CASE("simulated margins are unit Frechet") {
  const Index n = 20000;
  const double p = std::exp(-1.0);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DataMatrix x = simulate(make_scenario(0.3, 0.8), n, seed);
    for (Index j = 0; j < 2; ++j) {
      const double frac = static_cast<double>((x.values().col(j).array() <= 1.0).count()) / static_cast<double>(n);
      CHECK(std::abs(frac - p) <= 4 * se);
      const double tail = static_cast<double>((x.values().col(j).array() > 20.0).count()) / static_cast<double>(n);
      const double pt = 1 - std::exp(-1.0 / 20);
      CHECK(std::abs(tail - pt) <= 4 * std::sqrt(pt * (1 - pt) / static_cast<double>(n)));
    }
  }
}
