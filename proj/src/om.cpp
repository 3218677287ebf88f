#include "ompath/om.hpp"

#include "ompath/errors.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

namespace ompath {
namespace {

// Neumaier summation; the functional adds O(N) terms of mixed sign.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct Tap {
  std::size_t node;
  double coef;
};

// One quadrature point: state and velocity are linear combinations of nodes.
struct EvalPoint {
  double t = 0.0;
  double weight = 0.0;
  std::array<Tap, 3> x_taps{};
  std::size_t x_count = 0;
  std::array<Tap, 3> v_taps{};
  std::size_t v_count = 0;
};

std::vector<EvalPoint> build_stencil(std::size_t steps, OmScheme scheme) {
  const double h = 1.0 / static_cast<double>(steps);
  std::vector<EvalPoint> points;
  if (scheme == OmScheme::kMidpoint) {
    points.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      EvalPoint p;
      p.t = (static_cast<double>(k) + 0.5) * h;
      p.weight = h;
      p.x_taps = {Tap{k, 0.5}, Tap{k + 1, 0.5}};
      p.x_count = 2;
      p.v_taps = {Tap{k, -1.0 / h}, Tap{k + 1, 1.0 / h}};
      p.v_count = 2;
      points.push_back(p);
    }
    return points;
  }

  if (steps < 2) throw ContractError("nodal scheme needs at least 2 steps");
  const double c = 0.5 / h;
  points.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    EvalPoint p;
    p.t = static_cast<double>(k) * h;
    p.weight = (k == 0 || k == steps) ? 0.5 * h : h;
    p.x_taps = {Tap{k, 1.0}};
    p.x_count = 1;
    if (k == 0) {
      p.v_taps = {Tap{0, -3.0 * c}, Tap{1, 4.0 * c}, Tap{2, -c}};
      p.v_count = 3;
    } else if (k == steps) {
      p.v_taps = {Tap{steps, 3.0 * c}, Tap{steps - 1, -4.0 * c}, Tap{steps - 2, c}};
      p.v_count = 3;
    } else {
      p.v_taps = {Tap{k - 1, -c}, Tap{k + 1, c}};
      p.v_count = 2;
    }
    points.push_back(p);
  }
  return points;
}

Vector combine(const Eigen::MatrixXd& values, const std::array<Tap, 3>& taps, std::size_t count) {
  Vector out = Vector::Zero(values.cols());
  for (std::size_t i = 0; i < count; ++i) {
    out += taps[i].coef * values.row(static_cast<Eigen::Index>(taps[i].node)).transpose();
  }
  return out;
}

Matrix inverse_diffusion(const SdeModel& model, double t) {
  try {
    return mat_inverse(eval_diffusion(model, t));
  } catch (const SingularMatrixError& e) {
    std::ostringstream os;
    os << "diffusion g(" << t << ") is singular (det " << e.determinant() << ")";
    throw SingularMatrixError(os.str(), e.determinant());
  }
}

double literal_trace(const Matrix& g_inv, const Matrix& jac, const Matrix& g) {
  return (g_inv * jac * g).trace();
}

void check_path(const SdeModel& model, const DiscretePath& path) {
  if (path.dimension() != model.dimension) {
    throw ContractError("path dimension " + std::to_string(path.dimension()) +
                        " does not match model dimension " + std::to_string(model.dimension));
  }
}

void non_finite(double t) {
  std::ostringstream os;
  os << "non-finite Onsager-Machlup integrand at t = " << t;
  throw NumericalError(os.str());
}

}  // namespace

Matrix mat_inverse(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ContractError("mat_inverse needs a square matrix");
  if (!m.allFinite()) throw NumericalError("mat_inverse: non-finite entries");
  const Eigen::PartialPivLU<Matrix> lu(m);
  const double det = lu.determinant();
  const double scale = m.rowwise().norm().prod();
  if (!(scale > 0.0) || !(std::abs(det) > kSingularityThreshold * scale)) {
    std::ostringstream os;
    os << "matrix is singular (det " << det << ")";
    throw SingularMatrixError(os.str(), det);
  }
  return lu.inverse();
}

double divergence_term(const SdeModel& model, double t, const Vector& x) {
  const Matrix g = eval_diffusion(model, t);
  return literal_trace(inverse_diffusion(model, t), eval_drift_jacobian(model, t, x), g);
}

double divergence_term_simplified(const SdeModel& model, double t, const Vector& x) {
  return eval_drift_jacobian(model, t, x).trace();
}

double om_integrand(const SdeModel& model, double t, const Vector& x, const Vector& xdot) {
  if (xdot.size() != model.dimension) throw ContractError("velocity has wrong dimension");
  const Vector r = inverse_diffusion(model, t) * (xdot - eval_drift(model, t, x));
  return r.squaredNorm() + divergence_term(model, t, x);
}

OmEvaluation om_functional(const SdeModel& model, const DiscretePath& path, OmScheme scheme) {
  check_path(model, path);
  const auto& values = path.values();
  CompensatedSum drift_sum;
  CompensatedSum div_sum;
  for (const EvalPoint& p : build_stencil(path.steps(), scheme)) {
    const Vector x = combine(values, p.x_taps, p.x_count);
    const Vector v = combine(values, p.v_taps, p.v_count);
    const Matrix g = eval_diffusion(model, p.t);
    const Matrix g_inv = inverse_diffusion(model, p.t);
    const double kinetic = (g_inv * (v - eval_drift(model, p.t, x))).squaredNorm();
    const double div = literal_trace(g_inv, eval_drift_jacobian(model, p.t, x), g);
    if (!std::isfinite(kinetic) || !std::isfinite(div)) non_finite(p.t);
    drift_sum.add(p.weight * kinetic);
    div_sum.add(p.weight * div);
  }
  OmEvaluation out;
  out.drift_term = drift_sum.value();
  out.divergence_term = div_sum.value();
  out.total = out.drift_term + out.divergence_term;
  out.grid_size = path.steps();
  return out;
}

Eigen::MatrixXd om_path_gradient(const SdeModel& model, const DiscretePath& path, OmScheme scheme) {
  check_path(model, path);
  const auto& values = path.values();
  const std::size_t steps = path.steps();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(values.rows(), values.cols());
  for (const EvalPoint& p : build_stencil(steps, scheme)) {
    const Vector x = combine(values, p.x_taps, p.x_count);
    const Vector v = combine(values, p.v_taps, p.v_count);
    const Matrix g_inv = inverse_diffusion(model, p.t);
    const Vector r = g_inv * (v - eval_drift(model, p.t, x));
    // L = |r|^2 + Tr(grad f):  dL/dv = 2 g^{-T} r,  dL/dx = -J^T dL/dv + grad Tr(J)
    const Vector dl_dv = 2.0 * g_inv.transpose() * r;
    const Vector dl_dx = -eval_drift_jacobian(model, p.t, x).transpose() * dl_dv +
                         eval_divergence_gradient(model, p.t, x);
    if (!dl_dv.allFinite() || !dl_dx.allFinite()) non_finite(p.t);
    for (std::size_t i = 0; i < p.x_count; ++i) {
      full.row(static_cast<Eigen::Index>(p.x_taps[i].node)) += (p.weight * p.x_taps[i].coef) * dl_dx.transpose();
    }
    for (std::size_t i = 0; i < p.v_count; ++i) {
      full.row(static_cast<Eigen::Index>(p.v_taps[i].node)) += (p.weight * p.v_taps[i].coef) * dl_dv.transpose();
    }
  }
  return full.middleRows(1, static_cast<Eigen::Index>(steps) - 1);
}

std::size_t om_hessian_bandwidth(OmScheme scheme) noexcept {
  return scheme == OmScheme::kMidpoint ? 1 : 2;
}

}  // namespace ompath
