#pragma once

#include "tailmoments/core.hpp"

namespace tailmoments {

struct OrderStatistics {
  Index k = 0;
  /// X_{k:n,i}: the k-th largest value of column i, ties counted with multiplicity.
  Vector thresholds;
};

/// Entry (l, i) becomes data(l, i)^alpha / scales(i).
StandardizedMatrix standardize_known(const DataMatrix& data, double alpha, const Vector& scales);

OrderStatistics upper_order_statistics(const DataMatrix& data, Index k);

/// X_l / X_{k:n}, componentwise. Throws DegenerateThreshold when an order
/// statistic used by `set` is zero.
Matrix threshold_ratios(const DataMatrix& data, const OrderStatistics& os, const IndexSet& set);

/// Hill-type estimate of 1/alpha from the rows with l_I(X_l / X_{k:n}) > 1.
/// `estimate` is 1/alpha, `inverse_estimate` is alpha.
EstimateReport hill_inverse_alpha(const DataMatrix& data, Index k, const IndexSet& set);

}  // namespace tailmoments
