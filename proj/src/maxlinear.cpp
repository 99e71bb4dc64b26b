#include "tailmoments/maxlinear.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace tailmoments {

MaxLinearModel::MaxLinearModel(Matrix coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() < 1 || coeffs_.cols() < 1) fail(ErrorKind::InvalidModel, "coefficient matrix is empty");
  for (Index j = 0; j < coeffs_.rows(); ++j) {
    for (Index i = 0; i < coeffs_.cols(); ++i) {
      if (!std::isfinite(coeffs_(j, i)) || coeffs_(j, i) < 0.0) {
        fail(ErrorKind::InvalidModel, "coefficients must be finite and non-negative");
      }
    }
    if (std::abs(coeffs_.row(j).sum() - 1.0) > 1e-12) {
      fail(ErrorKind::InvalidModel, "row " + std::to_string(j + 1) + " does not sum to 1");
    }
  }
  for (Index i = 0; i < coeffs_.cols(); ++i) {
    if (!(coeffs_.col(i).maxCoeff() > 0.0)) {
      fail(ErrorKind::InvalidModel, "factor " + std::to_string(i + 1) + " has no positive loading");
    }
  }
}

MaxLinearModel make_scenario(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) fail(ErrorKind::ParamOutOfRange, "p and q must lie in [0, 1]");
  Matrix a(2, 4);
  a << 1.0, p, 1.0, q, p, 1.0, q, 1.0;
  return MaxLinearModel(a / (2.0 + p + q));
}

DiscreteSpectralMeasure model_spectral_measure(const MaxLinearModel& model) {
  const Matrix& a = model.coeffs();
  std::vector<Vector> atoms;
  std::vector<double> mass;
  double total = 0.0;
  for (Index i = 0; i < a.cols(); ++i) {
    const double top = a.col(i).maxCoeff();
    const Vector atom = a.col(i) / top;
    total += top;
    bool merged = false;
    for (std::size_t r = 0; r < atoms.size(); ++r) {
      if ((atoms[r] - atom).cwiseAbs().maxCoeff() <= 1e-12) {
        mass[r] += top;
        merged = true;
        break;
      }
    }
    if (!merged) {
      atoms.push_back(atom);
      mass.push_back(top);
    }
  }
  Matrix out(static_cast<Index>(atoms.size()), a.rows());
  Vector probs(static_cast<Index>(atoms.size()));
  for (std::size_t r = 0; r < atoms.size(); ++r) {
    out.row(static_cast<Index>(r)) = atoms[r].transpose();
    probs(static_cast<Index>(r)) = mass[r] / total;
  }
  return DiscreteSpectralMeasure(std::move(out), std::move(probs));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t row, std::uint64_t col) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ row) ^ (col * 0xD1B54A32D192ED03ULL));
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

DataMatrix simulate(const MaxLinearModel& model, Index n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::ParamOutOfRange, "n must be positive");
  const Matrix& a = model.coeffs();
  Matrix x = Matrix::Zero(n, a.rows());
  Vector z(a.cols());
  for (Index l = 0; l < n; ++l) {
    for (Index i = 0; i < a.cols(); ++i) {
      z(i) = -1.0 / std::log(counter_uniform(seed, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i)));
    }
    for (Index j = 0; j < a.rows(); ++j) {
      double m = 0.0;
      for (Index i = 0; i < a.cols(); ++i) m = std::max(m, a(j, i) * z(i));
      x(l, j) = m;
    }
  }
  return DataMatrix(std::move(x));
}

}  // namespace tailmoments
