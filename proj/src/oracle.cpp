#include "tailmoments/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace tailmoments {

namespace {

constexpr double kAtomTol = 1e-12;
constexpr double kStandardTol = 1e-9;
constexpr double kKinkTol = 1e-8;

double ipow(double x, unsigned p) {
  double r = 1.0;
  for (unsigned e = 0; e < p; ++e) r *= x;
  return r;
}

// Pairwise form 1/2 sum_a sum_b p_a p_b (x_a - x_b)(y_a - y_b); exactly zero
// for a degenerate variable.
double covariance(const Vector& probs, const Vector& x, const Vector& y) {
  double acc = 0.0;
  for (Index a = 0; a < probs.size(); ++a) {
    for (Index b = a + 1; b < probs.size(); ++b) acc += probs(a) * probs(b) * (x(a) - x(b)) * (y(a) - y(b));
  }
  return acc;
}

double xlogx_neg(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

void check_support_within(const WeightVector& v, const IndexSet& set) {
  for (Index i : v.support()) {
    if (!set.contains(i)) fail(ErrorKind::SupportViolation, "weight support must lie inside the index set");
  }
}

Vector combos(const DiscreteSpectralMeasure& m, const WeightVector& v, unsigned p) {
  Vector out(m.size());
  for (Index a = 0; a < m.size(); ++a) {
    double c = 0.0;
    for (Index i : v.support()) c += v[i] * m.atoms()(a, i);
    out(a) = ipow(c, p);
  }
  return out;
}

Index position_in(const IndexSet& set, Index i) {
  for (std::size_t a = 0; a < set.size(); ++a) {
    if (set[a] == i) return static_cast<Index>(a);
  }
  fail(ErrorKind::InvalidIndexSet, "component " + std::to_string(i + 1) + " is not in the index set");
}

struct OneSided {
  Vector central;
  Vector left;
  Vector right;
};

OneSided norm_slopes(const DiscreteSpectralMeasure& th, const IndexSet& set) {
  const Index m = static_cast<Index>(set.size());
  OneSided g{Vector::Zero(m), Vector::Zero(m), Vector::Zero(m)};
  for (Index a = 0; a < th.size(); ++a) {
    std::vector<Index> top;
    for (Index b = 0; b < m; ++b) {
      if (th.atoms()(a, set[static_cast<std::size_t>(b)]) >= 1.0 - kAtomTol) top.push_back(b);
    }
    const double share = th.probs()(a) / static_cast<double>(top.size());
    for (Index b : top) {
      g.central(b) += share;
      g.right(b) += th.probs()(a);
    }
    if (top.size() == 1) g.left(top.front()) += th.probs()(a);
  }
  return g;
}

Vector coordinate_means(const DiscreteSpectralMeasure& th, const IndexSet& set) {
  Vector mu = Vector::Zero(static_cast<Index>(set.size()));
  for (Index a = 0; a < th.size(); ++a) {
    for (std::size_t b = 0; b < set.size(); ++b) mu(static_cast<Index>(b)) += th.probs()(a) * th.atoms()(a, set[b]);
  }
  return mu;
}

Matrix derivative_matrix(const Vector& mu, const Vector& g) {
  const Index m = mu.size();
  Matrix c(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) c(a, b) = mu(b) * ((a == b ? 1.0 : 0.0) - g(a));
  }
  return c;
}

Matrix min_moments(const DiscreteSpectralMeasure& th, const IndexSet& set) {
  const Index m = static_cast<Index>(set.size());
  Matrix e = Matrix::Zero(m, m);
  for (Index a = 0; a < th.size(); ++a) {
    for (Index x = 0; x < m; ++x) {
      for (Index y = 0; y < m; ++y) {
        e(x, y) += th.probs()(a) *
                   std::min(th.atoms()(a, set[static_cast<std::size_t>(x)]), th.atoms()(a, set[static_cast<std::size_t>(y)]));
      }
    }
  }
  return e;
}

Matrix product_moments(const DiscreteSpectralMeasure& th, const IndexSet& set) {
  const Index m = static_cast<Index>(set.size());
  Matrix e = Matrix::Zero(m, m);
  Vector t(m);
  for (Index a = 0; a < th.size(); ++a) {
    for (Index x = 0; x < m; ++x) t(x) = th.atoms()(a, set[static_cast<std::size_t>(x)]);
    e.noalias() += th.probs()(a) * (t * t.transpose());
  }
  return e;
}

}  // namespace

DiscreteSpectralMeasure::DiscreteSpectralMeasure(Matrix atoms, Vector probs)
    : DiscreteSpectralMeasure(atoms, std::move(probs), IndexSet::full(std::max<Index>(atoms.cols(), 1))) {}

DiscreteSpectralMeasure::DiscreteSpectralMeasure(Matrix atoms, Vector probs, IndexSet norm_set)
    : atoms_(std::move(atoms)), probs_(std::move(probs)), norm_set_(std::move(norm_set)) {
  if (atoms_.rows() < 1 || atoms_.cols() < 1) fail(ErrorKind::InvalidMeasure, "measure needs at least one atom");
  if (probs_.size() != atoms_.rows()) fail(ErrorKind::InvalidMeasure, "one probability per atom required");
  norm_set_.check_dimension(atoms_.cols());
  double total = 0.0;
  for (Index a = 0; a < atoms_.rows(); ++a) {
    if (!(probs_(a) > 0.0) || !std::isfinite(probs_(a))) fail(ErrorKind::InvalidMeasure, "probabilities must be positive");
    total += probs_(a);
    for (Index i = 0; i < atoms_.cols(); ++i) {
      if (!std::isfinite(atoms_(a, i)) || atoms_(a, i) < 0.0) {
        fail(ErrorKind::InvalidMeasure, "atom coordinates must be finite and non-negative");
      }
    }
    if (std::abs(ell_norm(atoms_.row(a), norm_set_) - 1.0) > kAtomTol) {
      fail(ErrorKind::InvalidMeasure, "atom " + std::to_string(a + 1) + " is not normalized");
    }
  }
  if (std::abs(total - 1.0) > kAtomTol) fail(ErrorKind::InvalidMeasure, "probabilities must sum to 1");
}

double oracle_tau(const DiscreteSpectralMeasure& measure, const IndexSet& set) {
  set.check_dimension(measure.dim());
  const Vector means = measure.atoms().transpose() * measure.probs();
  if (means.maxCoeff() - means.minCoeff() > kStandardTol) {
    fail(ErrorKind::NotStandardized, "E[Theta_i] differ across components");
  }
  if (!(means(0) > 0.0)) fail(ErrorKind::NotStandardized, "E[Theta_1] is zero");
  double ell = 0.0;
  for (Index a = 0; a < measure.size(); ++a) ell += measure.probs()(a) * ell_norm(measure.atoms().row(a), set);
  return ell / means(0);
}

DiscreteSpectralMeasure oracle_theta_I(const DiscreteSpectralMeasure& measure, const IndexSet& set) {
  set.check_dimension(measure.dim());
  std::vector<Index> keep;
  double total = 0.0;
  for (Index a = 0; a < measure.size(); ++a) {
    const double ell = ell_norm(measure.atoms().row(a), set);
    if (ell > 0.0) {
      keep.push_back(a);
      total += measure.probs()(a) * ell;
    }
  }
  if (!(total > 0.0)) fail(ErrorKind::DegenerateDirection, "E[l_I(Theta)] = 0");
  Matrix atoms(static_cast<Index>(keep.size()), measure.dim());
  Vector probs(static_cast<Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const Index a = keep[r];
    const double ell = ell_norm(measure.atoms().row(a), set);
    atoms.row(static_cast<Index>(r)) = measure.atoms().row(a) / ell;
    probs(static_cast<Index>(r)) = measure.probs()(a) * ell / total;
  }
  return DiscreteSpectralMeasure(std::move(atoms), std::move(probs), set);
}

double oracle_moment(const DiscreteSpectralMeasure& measure, const IndexSet& set, const WeightVector& v, unsigned p) {
  check_support_within(v, set);
  if (v.dim() != measure.dim()) fail(ErrorKind::InvalidMeasure, "weight dimension does not match the measure");
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  return th.probs().dot(combos(th, v, p));
}

double oracle_pair_moment(const DiscreteSpectralMeasure& measure, const IndexSet& set, Index i, Index j) {
  position_in(set, i);
  position_in(set, j);
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  double e = 0.0;
  for (Index a = 0; a < th.size(); ++a) e += th.probs()(a) * th.atoms()(a, i) * th.atoms()(a, j);
  if (i != j && set == IndexSet::pair(i, j)) {
    const double check = 2.0 / oracle_tau(measure, set) - 1.0;
    if (std::abs(check - e) > kStandardTol) fail(ErrorKind::NotStandardized, "E[Theta_i Theta_j] != 2/tau_ij - 1");
  }
  return e;
}

double oracle_min_moment(const DiscreteSpectralMeasure& measure, const IndexSet& set, Index i, Index j) {
  position_in(set, i);
  position_in(set, j);
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  double e = 0.0;
  for (Index a = 0; a < th.size(); ++a) e += th.probs()(a) * std::min(th.atoms()(a, i), th.atoms()(a, j));
  return e;
}

double oracle_c(const DiscreteSpectralMeasure& measure, const WeightVector& v, const Perturbation& pert, unsigned p) {
  if (v.dim() != measure.dim() || pert.s().size() != measure.dim()) {
    fail(ErrorKind::InvalidMeasure, "dimension mismatch between measure, weights and perturbation");
  }
  const IndexSet active = pert.index_set();
  const Vector& s = pert.s();
  const double inv_beta = 1.0 / pert.beta();
  double num = 0.0;
  double den = 0.0;
  for (Index a = 0; a < measure.size(); ++a) {
    double norm = 0.0;
    for (Index i : active) norm = std::max(norm, s(i) * measure.atoms()(a, i));
    if (norm == 0.0) continue;
    double comb = 0.0;
    for (Index i : v.support()) comb += v[i] * std::pow(s(i) * measure.atoms()(a, i) / norm, inv_beta);
    num += measure.probs()(a) * ipow(comb, p) * norm;
    den += measure.probs()(a) * norm;
  }
  if (!(den > 0.0)) fail(ErrorKind::DegenerateDirection, "E[||s o Theta||] = 0");
  return num / den;
}

Vector oracle_norm_gradient(const DiscreteSpectralMeasure& measure, const IndexSet& set) {
  return norm_slopes(oracle_theta_I(measure, set), set).central;
}

DerivativeEstimates oracle_c_derivatives(const DiscreteSpectralMeasure& measure, const IndexSet& set,
                                         KinkPolicy policy) {
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  const Index m = static_cast<Index>(set.size());
  const OneSided g = norm_slopes(th, set);
  const Vector mu = coordinate_means(th, set);
  const bool smooth = (g.right - g.left).cwiseAbs().maxCoeff() <= kKinkTol;
  if (!smooth && policy == KinkPolicy::Strict) {
    fail(ErrorKind::NonDifferentiable, "s -> E[||s o Theta^I||] has a kink at 1_I");
  }
  Vector cb = Vector::Zero(m);
  for (Index a = 0; a < th.size(); ++a) {
    for (Index b = 0; b < m; ++b) cb(b) += th.probs()(a) * xlogx_neg(th.atoms()(a, set[static_cast<std::size_t>(b)]));
  }
  DerivativeEstimates out{set, derivative_matrix(mu, g.central), cb, std::nullopt, smooth, std::nullopt, std::nullopt};
  if (!smooth) {
    out.c_i_left = derivative_matrix(mu, g.left);
    out.c_i_right = derivative_matrix(mu, g.right);
  }
  return out;
}

OptimalWeights oracle_optimal_weights(const DiscreteSpectralMeasure& measure, const IndexSet& set) {
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  const Matrix v = product_moments(th, set);
  const SimplexSolution sol = solve_simplex_qp(v);
  if (set.size() == 2) {
    const double den = v(0, 0) - 2.0 * v(0, 1) + v(1, 1);
    if (den > 0.0) {
      const double v1 = (v(1, 1) - v(0, 1)) / den;
      if (v1 >= 0.0 && v1 <= 1.0) {
        const double f = (v(0, 0) * v(1, 1) - v(0, 1) * v(0, 1)) / den;
        if (std::abs(v1 - sol.weights(0)) > 1e-9 || std::abs(f - sol.objective) > 1e-9) {
          fail(ErrorKind::InvalidMeasure, "simplex minimizer disagrees with the bivariate closed form");
        }
      }
    }
  }
  return {weights_on(sol.weights.cwiseMax(0.0), set, measure.dim()), sol.objective};
}

double oracle_vtilde(const DiscreteSpectralMeasure& measure, const IndexSet& set, const WeightVector& v,
                     KinkPolicy policy) {
  check_support_within(v, set);
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  const DerivativeEstimates deriv = oracle_c_derivatives(measure, set, policy);
  const double tau = oracle_tau(measure, set);
  const Index m = static_cast<Index>(set.size());
  const Vector w = v.restricted(set);
  const Vector c = deriv.ci_at(w);
  const double cb = deriv.cbeta_at(w);

  const Vector y = combos(th, v, 1);
  const Matrix emin = min_moments(th, set);
  double term1 = covariance(th.probs(), y, y) / tau;
  double term2 = 0.0;
  double term4 = 0.0;
  for (Index a = 0; a < m; ++a) {
    const Vector xi = th.atoms().col(set[static_cast<std::size_t>(a)]);
    term2 += c(a) * covariance(th.probs(), xi, y);
    double nlog = 0.0;
    for (Index r = 0; r < th.size(); ++r) nlog += th.probs()(r) * xlogx_neg(xi(r));
    term4 += c(a) * nlog;
  }
  const double term3 = tau * c.dot(emin * c);
  return term1 - 2.0 * term2 + term3 - 2.0 * cb * term4 + cb * cb / tau;
}

QuadraticForm oracle_vtilde_form(const DiscreteSpectralMeasure& measure, const IndexSet& set, KinkPolicy policy) {
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  const DerivativeEstimates deriv = oracle_c_derivatives(measure, set, policy);
  const double tau = oracle_tau(measure, set);
  const Index m = static_cast<Index>(set.size());
  Matrix pair_tau = Matrix::Ones(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) {
      pair_tau(a, b) = pair_tau(b, a) =
          oracle_tau(measure, IndexSet::pair(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]));
    }
  }
  return QuadraticForm(set, assemble_vtilde_form(product_moments(th, set), deriv.c_i, deriv.c_beta, tau, pair_tau),
                       measure.dim());
}

double oracle_sigma_l2(const DiscreteSpectralMeasure& measure, const IndexSet& set) {
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  const Vector g = norm_slopes(th, set).central;
  const double tau = oracle_tau(measure, set);
  return tau * tau * tau * g.dot(min_moments(th, set) * g) - tau;
}

OracleAvars oracle_avars(const DiscreteSpectralMeasure& measure, const IndexSet& set) {
  const double tau = oracle_tau(measure, set);
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  const OptimalWeights star = oracle_optimal_weights(measure, set);
  const Vector y = combos(th, star.weights, 1);
  const double avar_mk = covariance(th.probs(), y, y) / tau;
  const double avar_bu = oracle_sigma_l2(measure, set) / (tau * tau * tau * tau);

  const QuadraticForm form = oracle_vtilde_form(measure, set);
  const SimplexSolution sol = solve_simplex_qp(form.matrix());
  const WeightVector v_tilde = weights_on(sol.weights.cwiseMax(0.0), set, measure.dim());
  const double avar_mu = oracle_vtilde(measure, set, v_tilde);
  const bool smooth = oracle_c_derivatives(measure, set).differentiable;
  return OracleAvars{(tau - 1.0) / (tau * tau * tau), avar_mk, avar_bu, avar_mu, star.weights, v_tilde, smooth,
                     sol.tangent_condition};
}

double oracle_cov_ratio(const DiscreteSpectralMeasure& measure, const IndexSet& set, const WeightVector& v,
                        const WeightVector& w, unsigned p1, unsigned p2) {
  check_support_within(v, set);
  check_support_within(w, set);
  const DiscreteSpectralMeasure th = oracle_theta_I(measure, set);
  return covariance(th.probs(), combos(th, v, p1), combos(th, w, p2)) / oracle_tau(measure, set);
}

}  // namespace tailmoments
