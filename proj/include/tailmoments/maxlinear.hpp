#pragma once

#include <cstdint>

#include "tailmoments/core.hpp"
#include "tailmoments/oracle.hpp"

namespace tailmoments {

/// X_j = max_i a_{ji} Z_i with i.i.d. unit Frechet Z_i. Rows of the d x m
/// coefficient matrix sum to 1, so every X_j is unit Frechet.
class MaxLinearModel {
 public:
  explicit MaxLinearModel(Matrix coeffs);

  const Matrix& coeffs() const noexcept { return coeffs_; }
  Vector row_sums() const { return coeffs_.rowwise().sum(); }
  Index dim() const noexcept { return coeffs_.rows(); }
  Index factors() const noexcept { return coeffs_.cols(); }

 private:
  Matrix coeffs_;
};

/// Rows (1, p, 1, q) and (p, 1, q, 1), divided by 2 + p + q.
MaxLinearModel make_scenario(double p, double q);

/// One atom per factor, a_{.i} / max_j a_{ji}, with mass proportional to
/// max_j a_{ji}; coinciding atoms are merged.
DiscreteSpectralMeasure model_spectral_measure(const MaxLinearModel& model);

/// Uniform (0,1) draw keyed by (seed, row, col); never 0 or 1.
double counter_uniform(std::uint64_t seed, std::uint64_t row, std::uint64_t col);

std::uint64_t splitmix64(std::uint64_t x);

/// n rows of the model; entry draws depend only on (seed, row, factor).
DataMatrix simulate(const MaxLinearModel& model, Index n, std::uint64_t seed);

}  // namespace tailmoments
