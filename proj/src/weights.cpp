#include "tailmoments/weights.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tailmoments/estimators.hpp"

namespace tailmoments {

namespace {

double form_scale(const Matrix& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

double tangent_condition(const Matrix& a) {
  const Index m = a.rows();
  if (m < 2) return 1.0;
  const Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(m, 1));
  const Matrix q = Matrix(qr.householderQ()).rightCols(m - 1);
  const Matrix b = q.transpose() * a * q;
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (b + b.transpose()), Eigen::EigenvaluesOnly)
                        .eigenvalues()
                        .cwiseAbs();
  const double hi = ev.maxCoeff();
  const double lo = ev.minCoeff();
  if (hi == 0.0 || lo <= 1e-14 * hi) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

SimplexSolution closed_form_two(const Matrix& a) {
  SimplexSolution sol;
  sol.route = SimplexRoute::ClosedForm;
  const double scale = form_scale(a);
  const double tie_tol = 1e-12 * scale;
  // Written as a sum of two differences so that symmetric inputs give exactly 1/2.
  const double den = (a(0, 0) - a(0, 1)) + (a(1, 1) - a(0, 1));
  Vector w(2);
  if (std::abs(den) <= 1e-14 * scale && std::abs(a(0, 0) - a(1, 1)) <= 1e-14 * scale) {
    w << 0.5, 0.5;
    sol.tie = true;
  } else {
    bool interior = false;
    if (den > 1e-14 * scale) {
      const double t = (a(1, 1) - a(0, 1)) / den;
      if (t >= 0.0 && t <= 1.0) {
        w << t, 1.0 - t;
        interior = true;
      }
    }
    if (!interior) {
      if (std::abs(a(0, 0) - a(1, 1)) <= tie_tol) sol.tie = true;
      if (a(0, 0) <= a(1, 1) + tie_tol) {
        w << 1.0, 0.0;
      } else {
        w << 0.0, 1.0;
      }
    }
  }
  sol.weights = w;
  sol.objective = w.dot(a * w);
  return sol;
}

SimplexSolution enumerate_faces(const Matrix& a) {
  const Index m = a.rows();
  if (m > 20) fail(ErrorKind::ParamOutOfRange, "face enumeration is limited to 20 coordinates");
  const double scale = form_scale(a);
  const double tie_tol = 1e-12 * scale;
  const double feas_tol = 1e-12;
  const double mult_tol = 1e-10 * scale;

  SimplexSolution best;
  best.route = SimplexRoute::Enumeration;
  bool have = false;
  double best_norm = 0.0;
  const unsigned long long faces = 1ULL << m;
  for (unsigned long long mask = 1; mask < faces; ++mask) {
    std::vector<Index> f;
    for (Index i = 0; i < m; ++i) {
      if (mask & (1ULL << i)) f.push_back(i);
    }
    const Index r = static_cast<Index>(f.size());
    Matrix kkt = Matrix::Zero(r + 1, r + 1);
    for (Index x = 0; x < r; ++x) {
      for (Index y = 0; y < r; ++y) kkt(x, y) = 2.0 * a(f[x], f[y]);
      kkt(x, r) = -1.0;
      kkt(r, x) = 1.0;
    }
    Vector rhs = Vector::Zero(r + 1);
    rhs(r) = 1.0;
    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite() || (kkt * sol - rhs).cwiseAbs().maxCoeff() > 1e-9 * scale) continue;

    Vector w = Vector::Zero(m);
    bool feasible = true;
    for (Index x = 0; x < r; ++x) {
      if (sol(x) < -feas_tol) {
        feasible = false;
        break;
      }
      w(f[x]) = std::max(0.0, sol(x));
    }
    if (!feasible) continue;
    const double total = w.sum();
    if (!(total > 0.0)) continue;
    w /= total;
    const double mu = sol(r);
    const Vector grad = 2.0 * (a * w);
    for (Index i = 0; i < m && feasible; ++i) {
      if (!(mask & (1ULL << i)) && grad(i) - mu < -mult_tol) feasible = false;
    }
    if (!feasible) continue;

    const double obj = w.dot(a * w);
    const double nrm = w.norm();
    if (!have || obj < best.objective - tie_tol) {
      best.weights = w;
      best.objective = obj;
      best_norm = nrm;
      best.tie = false;
      have = true;
    } else if (obj <= best.objective + tie_tol) {
      best.tie = true;
      if (nrm < best_norm - 1e-12) {
        best.weights = w;
        best.objective = obj;
        best_norm = nrm;
      }
    }
  }
  if (!have) fail(ErrorKind::ParamOutOfRange, "no KKT point found on any face");
  return best;
}

Vector project_simplex(const Vector& y) {
  Vector s = y;
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < s.size(); ++j) {
    cum += s(j);
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (s(j) - t > 0.0) theta = t;
  }
  return (y.array() - theta).cwiseMax(0.0).matrix();
}

SimplexSolution projected_gradient(const Matrix& a) {
  const Index m = a.rows();
  SimplexSolution sol;
  sol.route = SimplexRoute::ProjectedGradient;
  const double norm = Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  if (norm > 0.0) {
    const double step = 1.0 / (2.0 * norm);
    for (int it = 0; it < 10000; ++it) w = project_simplex(w - step * 2.0 * (a * w));
  } else {
    sol.tie = true;
  }
  sol.weights = w / w.sum();
  sol.objective = sol.weights.dot(a * sol.weights);
  return sol;
}

// Mean over rows with ||s o Y|| > 1 of ((s_j Y_j)/||s o Y||)^{1/beta} for every j in `set`.
struct AngularMeans {
  Vector means;
  long long count = 0;
};

AngularMeans angular_means(const Matrix& y, const IndexSet& set, const Vector& s, double beta) {
  const Index m = static_cast<Index>(set.size());
  AngularMeans out{Vector::Zero(m), 0};
  const double inv_beta = 1.0 / beta;
  for (Index l = 0; l < y.rows(); ++l) {
    double norm = 0.0;
    for (Index i : set) norm = std::max(norm, s(i) * y(l, i));
    if (!(norm > 1.0)) continue;
    ++out.count;
    for (Index b = 0; b < m; ++b) {
      const Index j = set[static_cast<std::size_t>(b)];
      const double ang = s(j) * y(l, j) / norm;
      out.means(b) += beta == 1.0 ? ang : std::pow(ang, inv_beta);
    }
  }
  if (out.count == 0) fail(ErrorKind::NoExceedances, "no row exceeds the perturbed threshold");
  out.means /= static_cast<double>(out.count);
  return out;
}

Vector unit_on(const IndexSet& set, Index d) {
  Vector s = Vector::Zero(d);
  for (Index i : set) s(i) = 1.0;
  return s;
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::EpsOutOfRange, "eps must lie in (0, 1)");
}

Index position_in(const IndexSet& set, Index i) {
  for (std::size_t a = 0; a < set.size(); ++a) {
    if (set[a] == i) return static_cast<Index>(a);
  }
  fail(ErrorKind::InvalidIndexSet, "component " + std::to_string(i + 1) + " is not in the index set");
}

Matrix transformed(const DataMatrix& data, Index k, const IndexSet& set, double inv_alpha) {
  return detail::rank_transform(data, k, set, 1.0 / inv_alpha);
}

void add_weight_parameters(EstimateReport& rep, const Vector& w, const IndexSet& set) {
  for (std::size_t a = 0; a < set.size(); ++a) {
    rep.parameters["w" + std::to_string(set[a] + 1)] = w(static_cast<Index>(a));
  }
}

}  // namespace

SimplexSolution solve_simplex_qp(const Matrix& a, std::optional<SimplexRoute> route) {
  if (a.rows() != a.cols() || a.rows() < 1) fail(ErrorKind::NonSymmetric, "form must be square and non-empty");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * form_scale(a)) {
    fail(ErrorKind::NonSymmetric, "form is not symmetric");
  }
  const Index m = a.rows();
  SimplexSolution sol;
  if (m == 1) {
    sol.weights = Vector::Ones(1);
    sol.objective = a(0, 0);
    return sol;
  }
  const SimplexRoute chosen = route ? *route
                              : m == 2 ? SimplexRoute::ClosedForm
                              : m <= 20 ? SimplexRoute::Enumeration
                                        : SimplexRoute::ProjectedGradient;
  switch (chosen) {
    case SimplexRoute::ClosedForm:
      if (m != 2) fail(ErrorKind::ParamOutOfRange, "closed form needs exactly two coordinates");
      sol = closed_form_two(a);
      break;
    case SimplexRoute::Enumeration:
      sol = enumerate_faces(a);
      break;
    case SimplexRoute::ProjectedGradient:
      sol = projected_gradient(a);
      break;
  }
  sol.tangent_condition = tangent_condition(a);
  return sol;
}

WeightVector minimize_quadratic_on_simplex(const QuadraticForm& form) {
  const SimplexSolution sol = solve_simplex_qp(form.matrix());
  return weights_on(sol.weights.cwiseMax(0.0), form.index_set(), form.dim());
}

QuadraticForm second_moment_matrix_known(const StandardizedMatrix& std_data, double u, const IndexSet& set) {
  if (!(u > 0.0)) fail(ErrorKind::ParamOutOfRange, "threshold u must be positive");
  set.check_dimension(std_data.d());
  const Index m = static_cast<Index>(set.size());
  const Matrix& x = std_data.values();
  Matrix v = Matrix::Zero(m, m);
  Vector theta(m);
  long long count = 0;
  for (Index l = 0; l < x.rows(); ++l) {
    const double norm = ell_norm(x.row(l), set);
    if (!(norm > u)) continue;
    ++count;
    for (Index a = 0; a < m; ++a) theta(a) = x(l, set[static_cast<std::size_t>(a)]) / norm;
    v.noalias() += theta * theta.transpose();
  }
  if (count == 0) fail(ErrorKind::NoExceedances, "no row with l_I(X*) > u");
  v /= static_cast<double>(count);
  return QuadraticForm(set, v, std_data.d());
}

QuadraticForm second_moment_matrix_ranks(const DataMatrix& data, Index k, const IndexSet& set,
                                         std::optional<double> inv_alpha_hat) {
  set.check_dimension(data.d());
  const double inv_alpha = detail::resolve_inv_alpha(data, k, set, inv_alpha_hat);
  const Index m = static_cast<Index>(set.size());
  const Index d = data.d();
  Matrix v(m, m);
  for (Index a = 0; a < m; ++a) {
    const WeightVector e = WeightVector::basis(set[static_cast<std::size_t>(a)], d);
    v(a, a) = moment_ratio_ranks(data, k, set, e, 2, inv_alpha).estimate;
  }
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) {
      const IndexSet pair = IndexSet::pair(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]);
      const WeightVector mid = WeightVector::uniform(pair, d);
      const double mixed = moment_ratio_ranks(data, k, set, mid, 2, inv_alpha).estimate;
      v(a, b) = v(b, a) = 2.0 * mixed - 0.5 * (v(a, a) + v(b, b));
    }
  }
  return QuadraticForm(set, v, d);
}

WeightVector optimal_weights_known(const StandardizedMatrix& std_data, double u, const IndexSet& set) {
  return minimize_quadratic_on_simplex(second_moment_matrix_known(std_data, u, set));
}

EstimateReport tau_mk(const StandardizedMatrix& std_data, double u, const IndexSet& set) {
  const QuadraticForm form = second_moment_matrix_known(std_data, u, set);
  const SimplexSolution sol = solve_simplex_qp(form.matrix());
  const WeightVector v = weights_on(sol.weights.cwiseMax(0.0), set, std_data.d());
  EstimateReport rep = moment_ratio_known(std_data, u, set, v, 1);
  rep.method = "MK";
  rep.parameters["objective"] = sol.objective;
  add_weight_parameters(rep, v.restricted(set), set);
  if (sol.tie) rep.flags.push_back("minimizer tie broken by least norm");
  return rep;
}

double diff_quotient_ci(const DataMatrix& data, Index k, const IndexSet& set, Index i, Index j, double eps,
                        std::optional<double> inv_alpha_hat) {
  check_eps(eps);
  set.check_dimension(data.d());
  position_in(set, i);
  const Index b = position_in(set, j);
  const double inv_alpha = detail::resolve_inv_alpha(data, k, set, inv_alpha_hat);
  const Matrix y = transformed(data, k, set, inv_alpha);
  Vector up = unit_on(set, data.d());
  Vector down = up;
  up(i) += eps;
  down(i) -= eps;
  const double r_up = angular_means(y, set, up, 1.0).means(b);
  const double r_down = angular_means(y, set, down, 1.0).means(b);
  return (r_up - r_down) / (2.0 * eps);
}

double diff_quotient_cbeta(const DataMatrix& data, Index k, const IndexSet& set, Index j, double eps,
                           std::optional<double> inv_alpha_hat) {
  check_eps(eps);
  set.check_dimension(data.d());
  const Index b = position_in(set, j);
  const double inv_alpha = detail::resolve_inv_alpha(data, k, set, inv_alpha_hat);
  const Matrix y = transformed(data, k, set, inv_alpha);
  const Vector one = unit_on(set, data.d());
  // Exponent alpha_hat/(1 +- eps) on X/X_{k:n} is exponent 1/(1 +- eps) on Y.
  const double r_flat = angular_means(y, set, one, 1.0 + eps).means(b);
  const double r_steep = angular_means(y, set, one, 1.0 - eps).means(b);
  return (r_flat - r_steep) / (2.0 * eps);
}

DerivativeEstimates estimate_derivatives(const DataMatrix& data, Index k, const IndexSet& set, double eps,
                                         std::optional<double> inv_alpha_hat) {
  check_eps(eps);
  set.check_dimension(data.d());
  const double inv_alpha = detail::resolve_inv_alpha(data, k, set, inv_alpha_hat);
  const Matrix y = transformed(data, k, set, inv_alpha);
  const Index m = static_cast<Index>(set.size());
  const Vector one = unit_on(set, data.d());

  const Vector base = angular_means(y, set, one, 1.0).means;
  Matrix c(m, m), left(m, m), right(m, m);
  for (Index a = 0; a < m; ++a) {
    Vector up = one;
    Vector down = one;
    up(set[static_cast<std::size_t>(a)]) += eps;
    down(set[static_cast<std::size_t>(a)]) -= eps;
    const Vector r_up = angular_means(y, set, up, 1.0).means;
    const Vector r_down = angular_means(y, set, down, 1.0).means;
    c.row(a) = ((r_up - r_down) / (2.0 * eps)).transpose();
    right.row(a) = ((r_up - base) / eps).transpose();
    left.row(a) = ((base - r_down) / eps).transpose();
  }
  const Vector r_flat = angular_means(y, set, one, 1.0 + eps).means;
  const Vector r_steep = angular_means(y, set, one, 1.0 - eps).means;

  DerivativeEstimates out{set, c, (r_flat - r_steep) / (2.0 * eps), eps, true, left, right};
  return out;
}

Matrix assemble_vtilde_form(const Matrix& second_moments, const Matrix& c_i, const Vector& c_beta, double tau,
                            const Matrix& pair_tau) {
  const Index m = second_moments.rows();
  const Matrix s = second_moments.array() - 1.0 / (tau * tau);
  Matrix t(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) t(a, b) = a == b ? 1.0 : 2.0 - pair_tau(a, b);
  }
  const Matrix bb = c_beta * c_beta.transpose();
  Matrix a = s / tau;
  a -= c_i.transpose() * s + s * c_i;
  a += c_i.transpose() * t * c_i;
  a -= bb * c_i + c_i.transpose() * bb;
  a += bb / tau;
  return 0.5 * (a + a.transpose());
}

GtildeIngredients gtilde_ingredients(const DataMatrix& data, Index k, const IndexSet& set, double eps,
                                     std::optional<double> inv_alpha_hat) {
  set.check_dimension(data.d());
  const double inv_alpha = detail::resolve_inv_alpha(data, k, set, inv_alpha_hat);
  const Index d = data.d();
  const Index m = static_cast<Index>(set.size());

  const double inv_tau = moment_ratio_ranks(data, k, set, WeightVector::uniform(set, d), 1, inv_alpha).estimate;
  if (!(inv_tau > 0.0)) fail(ErrorKind::NoExceedances, "moment estimate of 1/tau_I is zero");
  Matrix pair_tau = Matrix::Ones(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) {
      const IndexSet pair = IndexSet::pair(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]);
      const double r = moment_ratio_ranks(data, k, pair, WeightVector::uniform(pair, d), 1, inv_alpha).estimate;
      if (!(r > 0.0)) fail(ErrorKind::NoExceedances, "moment estimate of 1/tau_{ij} is zero");
      pair_tau(a, b) = pair_tau(b, a) = 1.0 / r;
    }
  }
  const QuadraticForm second = second_moment_matrix_ranks(data, k, set, inv_alpha);
  DerivativeEstimates deriv = estimate_derivatives(data, k, set, eps, inv_alpha);
  return GtildeIngredients{1.0 / inv_tau, pair_tau, second.matrix(), std::move(deriv), inv_alpha, eps};
}

QuadraticForm build_gtilde(const DataMatrix& data, Index k, const IndexSet& set, std::optional<double> eps,
                           std::optional<double> inv_alpha_hat) {
  const double e = eps ? *eps : static_cast<double>(k) / static_cast<double>(data.n());
  const GtildeIngredients g = gtilde_ingredients(data, k, set, e, inv_alpha_hat);
  return QuadraticForm(
      set, assemble_vtilde_form(g.second_moments, g.derivatives.c_i, g.derivatives.c_beta, g.tau, g.pair_tau),
      data.d());
}

EstimateReport tau_mu(const DataMatrix& data, Index k, const IndexSet& set, std::optional<double> eps,
                      std::optional<double> inv_alpha_hat) {
  const double e = eps ? *eps : static_cast<double>(k) / static_cast<double>(data.n());
  const GtildeIngredients g = gtilde_ingredients(data, k, set, e, inv_alpha_hat);
  const Matrix a = assemble_vtilde_form(g.second_moments, g.derivatives.c_i, g.derivatives.c_beta, g.tau, g.pair_tau);
  const SimplexSolution sol = solve_simplex_qp(a);
  const WeightVector v = weights_on(sol.weights.cwiseMax(0.0), set, data.d());

  EstimateReport rep = moment_ratio_ranks(data, k, set, v, 1, g.inv_alpha_hat);
  rep.method = "MU";
  double gval = sol.objective;
  if (gval < 0.0) {
    rep.flags.push_back("g~ negative at its minimizer; clamped to 0");
    gval = 0.0;
  }
  rep.std_error = std::sqrt(gval / static_cast<double>(k));
  rep.parameters["eps"] = e;
  rep.parameters["g_tilde"] = sol.objective;
  rep.parameters["tangent_condition"] = sol.tangent_condition;
  rep.parameters["kink_gap"] = (*g.derivatives.c_i_right - *g.derivatives.c_i_left).cwiseAbs().maxCoeff();
  add_weight_parameters(rep, v.restricted(set), set);
  if (sol.tie) rep.flags.push_back("minimizer tie broken by least norm");
  return rep;
}

}  // namespace tailmoments
