#pragma once

#include <optional>

#include "tailmoments/core.hpp"

namespace tailmoments {

/// Partial derivatives of c at (1_I, beta = 1) for basis weights.
/// c_i(a, b) holds c_{I[a]}(1_{I[b]}, 1_I, 1, 1) and c_beta(b) holds
/// c_beta(1_{I[b]}, 1_I, 1, 1). Values for a general v follow by linearity.
struct DerivativeEstimates {
  IndexSet index_set;
  Matrix c_i;
  Vector c_beta;
  /// Difference step; absent for exact values.
  std::optional<double> epsilon;
  bool differentiable = true;
  /// One-sided slopes in s, filled in when a kink was detected.
  std::optional<Matrix> c_i_left;
  std::optional<Matrix> c_i_right;

  /// (c_i(v))_{i in I} for v given on the members of I.
  Vector ci_at(const Vector& v_on_set) const { return c_i * v_on_set; }
  double cbeta_at(const Vector& v_on_set) const { return c_beta.dot(v_on_set); }
};

enum class SimplexRoute { ClosedForm, Enumeration, ProjectedGradient };

struct SimplexSolution {
  /// Minimizer on the members of the index set, in member order.
  Vector weights;
  double objective = 0.0;
  SimplexRoute route = SimplexRoute::ClosedForm;
  /// Several candidates attained the minimum and the tie-break decided.
  bool tie = false;
  /// Condition number of the form restricted to the zero-sum hyperplane
  /// (infinite when singular on it).
  double tangent_condition = 1.0;
};

/// Minimizes w^T A w over the unit simplex of dimension A.rows(). Routes:
/// closed form for two coordinates, face enumeration up to 20, projected
/// gradient beyond. `route` forces a specific algorithm.
SimplexSolution solve_simplex_qp(const Matrix& a, std::optional<SimplexRoute> route = std::nullopt);

WeightVector minimize_quadratic_on_simplex(const QuadraticForm& form);

/// V_hat_{ij}: mean of Theta_hat_i Theta_hat_j over rows with l_I(X*) > u.
QuadraticForm second_moment_matrix_known(const StandardizedMatrix& std_data, double u, const IndexSet& set);

/// E~[Theta_i Theta_j] by polarization of rank moment ratios at p = 2.
QuadraticForm second_moment_matrix_ranks(const DataMatrix& data, Index k, const IndexSet& set,
                                         std::optional<double> inv_alpha_hat = std::nullopt);

WeightVector optimal_weights_known(const StandardizedMatrix& std_data, double u, const IndexSet& set);

/// Moment ratio at the empirical minimizer v_hat*; estimates 1/tau_I.
EstimateReport tau_mk(const StandardizedMatrix& std_data, double u, const IndexSet& set);

/// Central quotient in s_i for c_i(1_j,1_I,1,1); i, j are 0-based members of `set`.
double diff_quotient_ci(const DataMatrix& data, Index k, const IndexSet& set, Index i, Index j, double eps,
                        std::optional<double> inv_alpha_hat = std::nullopt);

/// Central quotient in beta for c_beta(1_j,1_I,1,1).
double diff_quotient_cbeta(const DataMatrix& data, Index k, const IndexSet& set, Index j, double eps,
                           std::optional<double> inv_alpha_hat = std::nullopt);

/// Every c_i(1_j) and c_beta(1_j) for i, j in I from one rank transform.
DerivativeEstimates estimate_derivatives(const DataMatrix& data, Index k, const IndexSet& set, double eps,
                                         std::optional<double> inv_alpha_hat = std::nullopt);

/// Matrix of the quadratic v -> V~(v, 1) given its ingredients on I:
/// second moments, c-derivative basis values, tau_I and the pair
/// coefficients tau_{ij} (diagonal ignored).
Matrix assemble_vtilde_form(const Matrix& second_moments, const Matrix& c_i, const Vector& c_beta, double tau,
                            const Matrix& pair_tau);

struct GtildeIngredients {
  double tau = 0.0;
  Matrix pair_tau;
  Matrix second_moments;
  DerivativeEstimates derivatives;
  double inv_alpha_hat = 0.0;
  double eps = 0.0;
};

GtildeIngredients gtilde_ingredients(const DataMatrix& data, Index k, const IndexSet& set, double eps,
                                     std::optional<double> inv_alpha_hat = std::nullopt);

QuadraticForm build_gtilde(const DataMatrix& data, Index k, const IndexSet& set, std::optional<double> eps = std::nullopt,
                           std::optional<double> inv_alpha_hat = std::nullopt);

/// Rank moment ratio at the minimizer of g~; estimates 1/tau_I. eps defaults to k/n.
EstimateReport tau_mu(const DataMatrix& data, Index k, const IndexSet& set, std::optional<double> eps = std::nullopt,
                      std::optional<double> inv_alpha_hat = std::nullopt);

}  // namespace tailmoments
