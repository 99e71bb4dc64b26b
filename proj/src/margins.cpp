#include "tailmoments/margins.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace tailmoments {

StandardizedMatrix standardize_known(const DataMatrix& data, double alpha, const Vector& scales) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::NonPositiveAlpha, "alpha must be positive");
  if (scales.size() != data.d()) fail(ErrorKind::InvalidData, "one scale per column required");
  for (Index i = 0; i < scales.size(); ++i) {
    if (!(scales(i) > 0.0) || !std::isfinite(scales(i))) fail(ErrorKind::NonPositiveScale, "scales must be positive");
  }
  Matrix out(data.n(), data.d());
  for (Index i = 0; i < data.d(); ++i) {
    out.col(i) = data.values().col(i).array().pow(alpha) / scales(i);
  }
  return StandardizedMatrix(std::move(out), alpha, scales);
}

OrderStatistics upper_order_statistics(const DataMatrix& data, Index k) {
  if (k < 1 || k > data.n()) fail(ErrorKind::KOutOfRange, "k must lie in [1, n]");
  OrderStatistics os{k, Vector(data.d())};
  std::vector<double> column(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.d(); ++i) {
    for (Index l = 0; l < data.n(); ++l) column[static_cast<std::size_t>(l)] = data.values()(l, i);
    auto kth = column.begin() + (k - 1);
    std::nth_element(column.begin(), kth, column.end(), std::greater<>());
    os.thresholds(i) = *kth;
  }
  return os;
}

Matrix threshold_ratios(const DataMatrix& data, const OrderStatistics& os, const IndexSet& set) {
  set.check_dimension(data.d());
  Matrix ratios = Matrix::Zero(data.n(), data.d());
  for (Index i : set) {
    if (!(os.thresholds(i) > 0.0)) {
      fail(ErrorKind::DegenerateThreshold, "order statistic of column " + std::to_string(i + 1) + " is zero");
    }
    ratios.col(i) = data.values().col(i) / os.thresholds(i);
  }
  return ratios;
}

EstimateReport hill_inverse_alpha(const DataMatrix& data, Index k, const IndexSet& set) {
  const OrderStatistics os = upper_order_statistics(data, k);
  const Matrix ratios = threshold_ratios(data, os, set);
  double log_sum = 0.0;
  long long count = 0;
  for (Index l = 0; l < data.n(); ++l) {
    const double r = ell_norm(ratios.row(l), set);
    if (r > 1.0) {
      log_sum += std::log(r);
      ++count;
    }
  }
  if (count == 0) fail(ErrorKind::NoExceedances, "no row strictly exceeds the order-statistic threshold");

  EstimateReport rep;
  rep.method = "hill";
  rep.estimate = log_sum / static_cast<double>(count);
  rep.exceedance_count = count;
  rep.parameters = {{"k", static_cast<double>(k)}, {"n", static_cast<double>(data.n())}};
  if (rep.estimate > 0.0) {
    const double alpha = 1.0 / rep.estimate;
    rep.inverse_estimate = alpha;
    // Var(1/alpha_hat) ~ 1 / (tau_I alpha^2 k) with tau_I k ~ exceedance count.
    rep.std_error = 1.0 / (alpha * std::sqrt(static_cast<double>(count)));
  }
  return rep;
}

}  // namespace tailmoments
