#pragma once

#include <optional>

#include "tailmoments/core.hpp"

namespace tailmoments {

/// Row sums behind the generalized moment estimator: the sum of
/// (v^T ((s o X_l)/||s o X_l||)^{1/beta})^p over rows with ||s o X_l|| > u,
/// and the number of such rows.
struct MomentSums {
  double moment_sum = 0.0;
  long long exceedances = 0;
};

MomentSums moment_sums(const Matrix& values, double u, const WeightVector& v, const Perturbation& pert, unsigned p);

/// n^{-1} sum_l (v^T ((s o X*_l)^{1/beta} / ||(s o X*_l)^{1/beta}||))^p 1{||s o X*_l|| > u}
double m_hat(const StandardizedMatrix& std_data, double u, const WeightVector& v, const Perturbation& pert, unsigned p);

/// Exceedance fraction of ||s o X*_l|| over u.
double p_hat(const StandardizedMatrix& std_data, double u, const Perturbation& pert);

/// Known-margin moment ratio M_hat(v, 1_I, 1, p) / P_hat(1_I). For p = 1 it
/// estimates 1/tau_I and carries tau_hat and a standard error.
EstimateReport moment_ratio_known(const StandardizedMatrix& std_data, double u, const IndexSet& set,
                                  const WeightVector& v, unsigned p);

/// Conditional frequency of v^T X* > u given l_I(X*) > u.
EstimateReport benchmark_ratio_known(const StandardizedMatrix& std_data, double u, const IndexSet& set,
                                     const WeightVector& v);

/// Rank-based moment ratio using order-statistic thresholds X_{k:n} and the
/// angular power alpha_hat. When `inv_alpha_hat` is empty the Hill-type
/// estimate on `set` is used.
EstimateReport moment_ratio_ranks(const DataMatrix& data, Index k, const IndexSet& set, const WeightVector& v,
                                  unsigned p, std::optional<double> inv_alpha_hat = std::nullopt);

/// (n/k) P_tilde_{n,k,I} = L_hat(1_I), an estimate of tau_I. A standard error
/// for 1/L_hat is attached when `eps` is given; the partial derivatives of
/// s -> L(s) are then taken by central difference quotients.
EstimateReport stable_tail_estimate(const DataMatrix& data, Index k, const IndexSet& set,
                                    std::optional<double> eps = std::nullopt,
                                    std::optional<double> inv_alpha_hat = std::nullopt);

namespace detail {

/// (X_l / X_{k:n})^{alpha_hat} on the columns of `set`, zero elsewhere.
Matrix rank_transform(const DataMatrix& data, Index k, const IndexSet& set, double alpha_hat);

/// Inverse tail index to use for a rank estimator; validates a supplied value.
double resolve_inv_alpha(const DataMatrix& data, Index k, const IndexSet& set, std::optional<double> inv_alpha_hat);

}  // namespace detail

}  // namespace tailmoments
