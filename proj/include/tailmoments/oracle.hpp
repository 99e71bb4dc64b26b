#pragma once

#include <utility>

#include "tailmoments/core.hpp"
#include "tailmoments/weights.hpp"

namespace tailmoments {

/// Finitely many atoms (rows) with probabilities. Every atom has
/// l_J(atom) = 1 for the normalizing set J; J is the full set for a
/// max-norm spectral vector and J = I for a Theta^I law.
class DiscreteSpectralMeasure {
 public:
  DiscreteSpectralMeasure(Matrix atoms, Vector probs);
  DiscreteSpectralMeasure(Matrix atoms, Vector probs, IndexSet norm_set);

  const Matrix& atoms() const noexcept { return atoms_; }
  const Vector& probs() const noexcept { return probs_; }
  const IndexSet& norm_set() const noexcept { return norm_set_; }
  Index size() const noexcept { return atoms_.rows(); }
  Index dim() const noexcept { return atoms_.cols(); }

 private:
  Matrix atoms_;
  Vector probs_;
  IndexSet norm_set_;
};

/// tau_I = tau * E[l_I(Theta)] with tau = 1/E[Theta_1]. NotStandardized when
/// the E[Theta_i] differ by more than 1e-9.
double oracle_tau(const DiscreteSpectralMeasure& measure, const IndexSet& set);

/// Law of Theta^I: atoms theta/l_I(theta), probabilities proportional to p l_I(theta).
DiscreteSpectralMeasure oracle_theta_I(const DiscreteSpectralMeasure& measure, const IndexSet& set);

/// E[(v^T Theta^I)^p].
double oracle_moment(const DiscreteSpectralMeasure& measure, const IndexSet& set, const WeightVector& v, unsigned p);

/// E[Theta^I_i Theta^I_j]; for I = {i, j} also checked against 2/tau_{ij} - 1.
double oracle_pair_moment(const DiscreteSpectralMeasure& measure, const IndexSet& set, Index i, Index j);

/// E[Theta^I_i ^ Theta^I_j].
double oracle_min_moment(const DiscreteSpectralMeasure& measure, const IndexSet& set, Index i, Index j);

/// c(v, s, beta, p) of the generalized estimator's limit.
double oracle_c(const DiscreteSpectralMeasure& measure, const WeightVector& v, const Perturbation& pert, unsigned p);

enum class KinkPolicy {
  /// Split argmax ties evenly and report the one-sided slopes.
  Central,
  /// Throw NonDifferentiable at a kink.
  Strict
};

/// d/ds_i E[||s o Theta^I||] at s = 1_I for i in I, ties split evenly.
Vector oracle_norm_gradient(const DiscreteSpectralMeasure& measure, const IndexSet& set);

/// Exact c_i(1_j,1_I,1,1) and c_beta(1_j,1_I,1,1) for i, j in I.
DerivativeEstimates oracle_c_derivatives(const DiscreteSpectralMeasure& measure, const IndexSet& set,
                                         KinkPolicy policy = KinkPolicy::Central);

struct OptimalWeights {
  WeightVector weights;
  double objective;
};

/// v* minimizing E[(v^T Theta^I)^2] on the simplex, and the minimum.
OptimalWeights oracle_optimal_weights(const DiscreteSpectralMeasure& measure, const IndexSet& set);

/// V~(v, 1) from its five terms.
double oracle_vtilde(const DiscreteSpectralMeasure& measure, const IndexSet& set, const WeightVector& v,
                     KinkPolicy policy = KinkPolicy::Central);

/// Matrix of v -> V~(v, 1) on I.
QuadraticForm oracle_vtilde_form(const DiscreteSpectralMeasure& measure, const IndexSet& set,
                                 KinkPolicy policy = KinkPolicy::Central);

/// sigma_L^2 of the stable-tail estimator L_hat(1_I).
double oracle_sigma_l2(const DiscreteSpectralMeasure& measure, const IndexSet& set);

struct OracleAvars {
  double avar_bk;
  double avar_mk;
  double avar_bu;
  double avar_mu;
  WeightVector v_star;
  WeightVector v_tilde;
  bool differentiable;
  double vtilde_condition;
};

OracleAvars oracle_avars(const DiscreteSpectralMeasure& measure, const IndexSet& set);

/// tau_I^{-1} Cov((v^T Theta^I)^p1, (w^T Theta^I)^p2).
double oracle_cov_ratio(const DiscreteSpectralMeasure& measure, const IndexSet& set, const WeightVector& v,
                        const WeightVector& w, unsigned p1, unsigned p2);

}  // namespace tailmoments
