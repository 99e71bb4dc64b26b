#include "tailmoments/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tailmoments {

namespace {

void check_entries(const Matrix& values, const char* what) {
  if (values.rows() < 1 || values.cols() < 1) fail(ErrorKind::InvalidData, std::string(what) + " must be at least 1 x 1");
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index l = 0; l < values.rows(); ++l) {
      const double x = values(l, j);
      if (!std::isfinite(x) || x < 0.0) {
        std::ostringstream os;
        os << what << " entry (" << l + 1 << "," << j + 1 << ") = " << x << " is not finite and non-negative";
        fail(ErrorKind::InvalidData, os.str());
      }
    }
  }
}

}  // namespace

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) { check_entries(values_, "data"); }

StandardizedMatrix::StandardizedMatrix(Matrix values, double alpha, Vector scales)
    : values_(std::move(values)), alpha_(alpha), scales_(std::move(scales)) {
  check_entries(values_, "standardized data");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) fail(ErrorKind::NonPositiveAlpha, "alpha must be positive");
  if (scales_.size() != values_.cols()) fail(ErrorKind::InvalidData, "one scale per column required");
  for (Index i = 0; i < scales_.size(); ++i) {
    if (!(scales_(i) > 0.0) || !std::isfinite(scales_(i))) fail(ErrorKind::NonPositiveScale, "scales must be positive");
  }
}

StandardizedMatrix StandardizedMatrix::assume_standardized(const DataMatrix& data) {
  return StandardizedMatrix(data.values(), 1.0, Vector::Ones(data.d()));
}

IndexSet IndexSet::from_zero_based(std::vector<Index> members) {
  if (members.empty()) fail(ErrorKind::InvalidIndexSet, "index set must be non-empty");
  std::sort(members.begin(), members.end());
  if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
    fail(ErrorKind::InvalidIndexSet, "index set has duplicate members");
  }
  if (members.front() < 0) fail(ErrorKind::InvalidIndexSet, "index set members must be >= 1");
  return IndexSet(std::move(members));
}

IndexSet IndexSet::from_one_based(const std::vector<long long>& members) {
  std::vector<Index> zero;
  zero.reserve(members.size());
  for (long long m : members) {
    if (m < 1) fail(ErrorKind::InvalidIndexSet, "component indices are 1-based");
    zero.push_back(static_cast<Index>(m - 1));
  }
  return from_zero_based(std::move(zero));
}

IndexSet IndexSet::full(Index d) {
  if (d < 1) fail(ErrorKind::InvalidIndexSet, "dimension must be >= 1");
  std::vector<Index> m(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) m[static_cast<std::size_t>(i)] = i;
  return IndexSet(std::move(m));
}

IndexSet IndexSet::pair(Index i, Index j) {
  if (i == j) return from_zero_based({i});
  return from_zero_based({i, j});
}

bool IndexSet::contains(Index i) const { return std::binary_search(members_.begin(), members_.end(), i); }

std::vector<long long> IndexSet::to_one_based() const {
  std::vector<long long> out;
  out.reserve(members_.size());
  for (Index m : members_) out.push_back(static_cast<long long>(m) + 1);
  return out;
}

void IndexSet::check_dimension(Index d) const {
  if (max() >= d) {
    std::ostringstream os;
    os << "index " << max() + 1 << " exceeds dimension " << d;
    fail(ErrorKind::InvalidIndexSet, os.str());
  }
}

Vector WeightVector::restricted(const IndexSet& set) const {
  Vector out(static_cast<Index>(set.size()));
  for (std::size_t a = 0; a < set.size(); ++a) out(static_cast<Index>(a)) = weights_(set[a]);
  return out;
}

WeightVector WeightVector::uniform(const IndexSet& support, Index d) {
  support.check_dimension(d);
  Vector w = Vector::Zero(d);
  const double each = 1.0 / static_cast<double>(support.size());
  for (Index i : support) w(i) = each;
  return WeightVector(std::move(w), support);
}

WeightVector WeightVector::basis(Index i, Index d) {
  const IndexSet s = IndexSet::from_zero_based({i});
  s.check_dimension(d);
  Vector w = Vector::Zero(d);
  w(i) = 1.0;
  return WeightVector(std::move(w), s);
}

WeightVector make_weight_vector(const Vector& raw, const IndexSet& support) {
  support.check_dimension(raw.size());
  double sum = 0.0;
  for (Index i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw(i))) fail(ErrorKind::NegativeWeight, "weights must be finite");
    if (support.contains(i)) {
      if (raw(i) < 0.0) fail(ErrorKind::NegativeWeight, "weight " + std::to_string(i + 1) + " is negative");
      sum += raw(i);
    } else if (raw(i) != 0.0) {
      fail(ErrorKind::SupportViolation, "weight " + std::to_string(i + 1) + " lies outside the support");
    }
  }
  if (!(sum > 0.0)) fail(ErrorKind::ZeroSum, "weights sum to zero");
  return WeightVector(raw / sum, support);
}

WeightVector weights_on(const Vector& on_support, const IndexSet& support, Index d) {
  if (on_support.size() != static_cast<Index>(support.size())) {
    fail(ErrorKind::SupportViolation, "weight count does not match the support");
  }
  support.check_dimension(d);
  Vector raw = Vector::Zero(d);
  for (std::size_t a = 0; a < support.size(); ++a) raw(support[a]) = on_support(static_cast<Index>(a));
  return make_weight_vector(raw, support);
}

Perturbation Perturbation::unit(const IndexSet& set, Index d) {
  set.check_dimension(d);
  Vector s = Vector::Zero(d);
  for (Index i : set) s(i) = 1.0;
  return Perturbation(std::move(s), 1.0, 0.0);
}

Perturbation::Perturbation(Vector s, double beta) : s_(std::move(s)), beta_(beta), delta_(0.0) {
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) fail(ErrorKind::InvalidPerturbation, "beta must be positive");
  double band = std::abs(std::log(beta_));
  bool any = false;
  for (Index i = 0; i < s_.size(); ++i) {
    if (!std::isfinite(s_(i)) || s_(i) < 0.0) fail(ErrorKind::InvalidPerturbation, "s must be finite and non-negative");
    if (s_(i) > 0.0) {
      any = true;
      band = std::max(band, std::abs(std::log(s_(i))));
    }
  }
  if (!any) fail(ErrorKind::InvalidPerturbation, "s has no positive entry");
  delta_ = std::expm1(band);
}

IndexSet Perturbation::index_set() const {
  std::vector<Index> m;
  for (Index i = 0; i < s_.size(); ++i) {
    if (s_(i) > 0.0) m.push_back(i);
  }
  return IndexSet::from_zero_based(std::move(m));
}

Perturbation make_perturbation(Vector s, double beta, double delta) {
  if (!(delta >= 0.0)) fail(ErrorKind::InvalidPerturbation, "delta must be non-negative");
  const double hi = 1.0 + delta;
  const double lo = 1.0 / hi;
  // One ulp of slack so that the endpoints themselves are admissible.
  auto inside = [&](double x) { return x >= lo * (1 - 1e-15) && x <= hi * (1 + 1e-15); };
  if (!inside(beta)) fail(ErrorKind::InvalidPerturbation, "beta outside the admissible band");
  bool any = false;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) == 0.0) continue;
    if (!inside(s(i))) fail(ErrorKind::InvalidPerturbation, "s_" + std::to_string(i + 1) + " outside the admissible band");
    any = true;
  }
  if (!any) fail(ErrorKind::InvalidPerturbation, "s has no positive entry");
  return Perturbation(std::move(s), beta, delta);
}

QuadraticForm::QuadraticForm(IndexSet set, Matrix matrix, Index dim)
    : set_(std::move(set)), matrix_(std::move(matrix)), dim_(dim) {
  const Index m = static_cast<Index>(set_.size());
  if (matrix_.rows() != m || matrix_.cols() != m) fail(ErrorKind::NonSymmetric, "matrix must be |I| x |I|");
  set_.check_dimension(dim_);
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    fail(ErrorKind::NonSymmetric, "matrix is not symmetric");
  }
}

}  // namespace tailmoments
