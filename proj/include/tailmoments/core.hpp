#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tailmoments/error.hpp"

namespace tailmoments {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-12;

/// Raw n x d observation matrix; rows are samples. Entries are finite and
/// non-negative.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  Index n() const noexcept { return values_.rows(); }
  Index d() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
};

/// Margin-standardized observations X* = X^alpha / r together with the
/// transform that produced them.
class StandardizedMatrix {
 public:
  StandardizedMatrix(Matrix values, double alpha, Vector scales);

  /// Data already on the standardized scale (alpha = 1, unit scales).
  static StandardizedMatrix assume_standardized(const DataMatrix& data);

  const Matrix& values() const noexcept { return values_; }
  double alpha() const noexcept { return alpha_; }
  const Vector& scales() const noexcept { return scales_; }
  Index n() const noexcept { return values_.rows(); }
  Index d() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
  double alpha_;
  Vector scales_;
};

/// Non-empty strictly increasing set of component indices. Stored 0-based;
/// the 1-based form only appears at the CLI/file boundary.
class IndexSet {
 public:
  static IndexSet from_zero_based(std::vector<Index> members);
  static IndexSet from_one_based(const std::vector<long long>& members);
  static IndexSet full(Index d);
  static IndexSet pair(Index i, Index j);

  const std::vector<Index>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  Index operator[](std::size_t pos) const { return members_[pos]; }
  bool contains(Index i) const;
  Index max() const { return members_.back(); }
  std::vector<long long> to_one_based() const;

  /// Throws InvalidIndexSet unless every member is < d.
  void check_dimension(Index d) const;

  bool operator==(const IndexSet&) const = default;

  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

 private:
  explicit IndexSet(std::vector<Index> members) : members_(std::move(members)) {}
  std::vector<Index> members_;
};

/// Convex weights on the unit simplex, zero outside `support`.
class WeightVector {
 public:
  const Vector& weights() const noexcept { return weights_; }
  const IndexSet& support() const noexcept { return support_; }
  Index dim() const noexcept { return weights_.size(); }
  double operator[](Index i) const { return weights_(i); }

  /// Entries on `set`, in member order.
  Vector restricted(const IndexSet& set) const;

  static WeightVector uniform(const IndexSet& support, Index d);
  static WeightVector basis(Index i, Index d);

 private:
  friend WeightVector make_weight_vector(const Vector& raw, const IndexSet& support);
  WeightVector(Vector w, IndexSet s) : weights_(std::move(w)), support_(std::move(s)) {}
  Vector weights_;
  IndexSet support_;
};

/// Renormalizes `raw` onto the simplex. Errors: NegativeWeight, ZeroSum,
/// SupportViolation (non-zero weight outside `support`).
WeightVector make_weight_vector(const Vector& raw, const IndexSet& support);

/// Lift weights given on the members of `support` to a full d-vector.
WeightVector weights_on(const Vector& on_support, const IndexSet& support, Index d);

/// Threshold scaling s and power beta of the generalized moment estimator.
/// The index set it acts on is the set of positive entries of s.
class Perturbation {
 public:
  /// s = 1_I, beta = 1, delta = 0.
  static Perturbation unit(const IndexSet& set, Index d);

  /// Smallest admissible band containing (s, beta).
  Perturbation(Vector s, double beta);

  const Vector& s() const noexcept { return s_; }
  double beta() const noexcept { return beta_; }
  double delta() const noexcept { return delta_; }
  IndexSet index_set() const;

 private:
  Perturbation(Vector s, double beta, double delta) : s_(std::move(s)), beta_(beta), delta_(delta) {}
  friend Perturbation make_perturbation(Vector s, double beta, double delta);
  Vector s_;
  double beta_;
  double delta_;
};

/// Validates (s, beta) against the band [(1+delta)^-1, 1+delta].
Perturbation make_perturbation(Vector s, double beta, double delta);

/// v -> v^T A v on an index set; the matrix is |I| x |I|.
class QuadraticForm {
 public:
  QuadraticForm(IndexSet set, Matrix matrix, Index dim);

  const IndexSet& index_set() const noexcept { return set_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return dim_; }

  double operator()(const Vector& on_support) const { return on_support.dot(matrix_ * on_support); }
  double operator()(const WeightVector& v) const { return (*this)(v.restricted(set_)); }

 private:
  IndexSet set_;
  Matrix matrix_;
  Index dim_;
};

struct EstimateReport {
  double estimate = 0.0;
  std::optional<double> inverse_estimate;
  std::optional<double> std_error;
  long long exceedance_count = 0;
  std::string method;
  std::map<std::string, double> parameters;
  std::vector<std::string> flags;
};

/// l_I(x) = max_{i in I} x_i.
template <typename Derived>
typename Derived::Scalar ell_norm(const Eigen::MatrixBase<Derived>& x, const IndexSet& set) {
  auto it = set.begin();
  typename Derived::Scalar m = x(*it);
  for (++it; it != set.end(); ++it) m = std::max(m, x(*it));
  return m;
}

}  // namespace tailmoments
