#include "ompath/optimize.hpp"

#include "ompath/errors.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace ompath {
namespace {

using Flat = Eigen::VectorXd;

Flat flatten_interior(const DiscretePath& path) {
  const Eigen::Index n = path.dimension();
  const auto interior = static_cast<Eigen::Index>(path.steps()) - 1;
  Flat z(interior * n);
  for (Eigen::Index k = 0; k < interior; ++k) z.segment(k * n, n) = path.values().row(k + 1).transpose();
  return z;
}

void assign_interior(DiscretePath& path, const Flat& z) {
  const Eigen::Index n = path.dimension();
  const auto interior = static_cast<Eigen::Index>(path.steps()) - 1;
  for (Eigen::Index k = 0; k < interior; ++k) path.values().row(k + 1) = z.segment(k * n, n).transpose();
}

Flat flatten_gradient(const Eigen::MatrixXd& grad) {
  Flat out(grad.size());
  for (Eigen::Index k = 0; k < grad.rows(); ++k) out.segment(k * grad.cols(), grad.cols()) = grad.row(k).transpose();
  return out;
}

// Objective restricted to the interior nodes of a working path.
class PinnedObjective {
 public:
  PinnedObjective(const SdeModel& model, DiscretePath path, OmScheme scheme)
      : model_(model), work_(std::move(path)), scheme_(scheme) {}

  double value(const Flat& z) {
    assign_interior(work_, z);
    return om_functional(model_, work_, scheme_).total;
  }

  Flat gradient(const Flat& z) {
    assign_interior(work_, z);
    return flatten_gradient(om_path_gradient(model_, work_, scheme_));
  }

  // Central differences of the exact gradient. Perturbing every
  // (2 * bandwidth + 1)-th node at once still separates the columns because
  // a gradient row only depends on nodes within the bandwidth.
  Eigen::SparseMatrix<double> hessian(const Flat& z) {
    const Eigen::Index n = work_.dimension();
    const Eigen::Index nodes = static_cast<Eigen::Index>(work_.steps()) - 1;
    const auto bw = static_cast<Eigen::Index>(om_hessian_bandwidth(scheme_));
    const Eigen::Index colors = 2 * bw + 1;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(nodes * n * n * colors));

    Flat step = Flat::Zero(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) step[i] = 1e-5 * std::max(1.0, std::abs(z[i]));

    for (Eigen::Index color = 0; color < std::min(colors, nodes); ++color) {
      for (Eigen::Index c = 0; c < n; ++c) {
        Flat up = z;
        Flat down = z;
        for (Eigen::Index k = color; k < nodes; k += colors) {
          up[k * n + c] += step[k * n + c];
          down[k * n + c] -= step[k * n + c];
        }
        const Flat diff = gradient(up) - gradient(down);
        for (Eigen::Index k = color; k < nodes; k += colors) {
          const Eigen::Index col = k * n + c;
          const Eigen::Index first = std::max<Eigen::Index>(0, k - bw);
          const Eigen::Index last = std::min<Eigen::Index>(nodes - 1, k + bw);
          for (Eigen::Index r = first; r <= last; ++r) {
            for (Eigen::Index rc = 0; rc < n; ++rc) {
              const Eigen::Index row = r * n + rc;
              entries.emplace_back(row, col, diff[row] / (2.0 * step[col]));
            }
          }
        }
      }
    }
    Eigen::SparseMatrix<double> h(z.size(), z.size());
    h.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseMatrix<double> ht = h.transpose();
    return 0.5 * (h + ht);
  }

  DiscretePath path_at(const Flat& z) {
    assign_interior(work_, z);
    return work_;
  }

 private:
  const SdeModel& model_;
  DiscretePath work_;
  OmScheme scheme_;
};

// Newton direction with a Levenberg shift until the factorization succeeds
// and the result points downhill.
Flat newton_direction(const Eigen::SparseMatrix<double>& hessian, const Flat& grad) {
  const double diag_scale = std::max(1.0, hessian.diagonal().cwiseAbs().maxCoeff());
  Eigen::SparseMatrix<double> identity(hessian.rows(), hessian.cols());
  identity.setIdentity();
  double shift = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    llt.compute(shift == 0.0 ? hessian : Eigen::SparseMatrix<double>(hessian + shift * identity));
    if (llt.info() == Eigen::Success) {
      Flat p = llt.solve(-grad);
      if (llt.info() == Eigen::Success && p.allFinite() && grad.dot(p) < 0.0) return p;
    }
    shift = shift == 0.0 ? 1e-10 * diag_scale : shift * 10.0;
  }
  return -grad;
}

}  // namespace

std::string_view to_string(DescentMethod method) noexcept {
  switch (method) {
    case DescentMethod::kNewton:
      return "newton";
    case DescentMethod::kConjugateGradient:
      return "cg";
    case DescentMethod::kGradientDescent:
      return "gd";
  }
  return "newton";
}

DescentMethod parse_descent_method(std::string_view text) {
  if (text == "newton") return DescentMethod::kNewton;
  if (text == "cg") return DescentMethod::kConjugateGradient;
  if (text == "gd") return DescentMethod::kGradientDescent;
  throw ContractError("unknown descent method '" + std::string(text) + "' (newton|cg|gd)");
}

void OptimizerConfig::validate() const {
  if (steps < 8) throw ContractError("optimizer grid needs at least 8 steps");
  if (!(gradient_tolerance > 0.0)) throw ContractError("gradient tolerance must be positive");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
    throw ContractError("line search shrink factor must lie in (0, 1)");
  }
  if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
    throw ContractError("sufficient decrease constant must lie in (0, 1)");
  }
  if (line_search.max_backtracks < 1) throw ContractError("line search needs at least one backtrack");
  if (!(line_search.max_step > 0.0)) throw ContractError("line search step cap must be positive");
}

OptimizeResult minimize_om(const SdeModel& model, const Vector& x_start, const Vector& x_end,
                           const OptimizerConfig& config) {
  config.validate();
  if (x_start.size() != model.dimension || x_end.size() != model.dimension) {
    throw ContractError("endpoints do not match model dimension");
  }
  if (!x_start.allFinite() || !x_end.allFinite()) throw ContractError("endpoints must be finite");

  DiscretePath initial = config.initial_path ? *config.initial_path
                                             : DiscretePath::linear(x_start, x_end, config.steps);
  if (initial.dimension() != model.dimension || initial.steps() < 8) {
    throw ContractError("initial path does not match model dimension or is too coarse");
  }
  initial.values().row(0) = x_start.transpose();
  initial.values().row(static_cast<Eigen::Index>(initial.steps())) = x_end.transpose();

  PinnedObjective objective(model, initial, config.scheme);
  Flat z = flatten_interior(initial);
  double f = objective.value(z);
  Flat grad = objective.gradient(z);

  OptimizeResult result;
  result.om_history.push_back(f);

  Flat prev_grad;
  Flat direction;
  double last_alpha = 1.0;
  const LineSearch& ls = config.line_search;
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  std::size_t iter = 0;
  for (; iter < config.max_iters; ++iter) {
    if (grad.size() == 0 || grad.cwiseAbs().maxCoeff() <= config.gradient_tolerance) {
      result.converged = true;
      break;
    }

    switch (config.method) {
      case DescentMethod::kNewton:
        direction = newton_direction(objective.hessian(z), grad);
        break;
      case DescentMethod::kConjugateGradient: {
        if (prev_grad.size() == grad.size() && direction.size() == grad.size()) {
          const double beta = std::max(0.0, grad.dot(grad - prev_grad) / prev_grad.squaredNorm());
          direction = -grad + beta * direction;
          if (grad.dot(direction) >= 0.0) direction = -grad;
        } else {
          direction = -grad;
        }
        break;
      }
      case DescentMethod::kGradientDescent:
        direction = -grad;
        break;
    }

    const double slope = grad.dot(direction);
    double alpha = config.method == DescentMethod::kNewton ? 1.0 : std::min(1.0, 2.0 * last_alpha);
    if (config.method != DescentMethod::kNewton && iter == 0) {
      alpha = 1.0 / std::max(1.0, direction.cwiseAbs().maxCoeff() * static_cast<double>(initial.steps()));
    }
    alpha = std::min(alpha, ls.max_step / std::max(direction.cwiseAbs().maxCoeff(), 1e-300));

    bool accepted = false;
    Flat trial;
    double f_trial = 0.0;
    for (int b = 0; b < ls.max_backtracks; ++b, alpha *= ls.shrink) {
      trial = z + alpha * direction;
      try {
        f_trial = objective.value(trial);
      } catch (const NumericalError&) {
        continue;
      }
      if (f_trial <= f + ls.sufficient_decrease * alpha * slope) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      // Once the predicted decrease is below the rounding noise of the
      // functional, Armijo cannot discriminate; accept the full step if it
      // still reduces the gradient.
      if (std::abs(slope) > 64.0 * kEps * (1.0 + std::abs(f))) break;
      alpha = config.method == DescentMethod::kNewton ? 1.0 : last_alpha;
      trial = z + alpha * direction;
      const Flat trial_grad = objective.gradient(trial);
      if (!(trial_grad.cwiseAbs().maxCoeff() < grad.cwiseAbs().maxCoeff())) break;
      f_trial = objective.value(trial);
    }

    last_alpha = alpha;
    prev_grad = grad;
    z = trial;
    f = f_trial;
    grad = objective.gradient(z);
    result.om_history.push_back(f);
  }

  result.iterations = iter;
  if (!result.converged && grad.size() > 0) {
    result.converged = grad.cwiseAbs().maxCoeff() <= config.gradient_tolerance;
  }
  result.path = objective.path_at(z);
  result.om = om_functional(model, result.path, config.scheme);
  result.gradient_norm = grad.size() == 0 ? 0.0 : grad.cwiseAbs().maxCoeff();
  result.el_residual = euler_lagrange_residual(model, result.path);
  return result;
}

std::vector<OptimizeResult> minimize_om_multistart(const SdeModel& model, const Vector& x_start,
                                                   const Vector& x_end, const OptimizerConfig& config,
                                                   std::size_t starts, std::uint64_t seed) {
  if (starts < 1) throw ContractError("multi-start needs at least one start");
  std::vector<OptimizeResult> results;
  results.reserve(starts);
  results.push_back(minimize_om(model, x_start, x_end, config));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double amplitude = 0.5 * std::max(1.0, (x_end - x_start).cwiseAbs().maxCoeff());
  for (std::size_t s = 1; s < starts; ++s) {
    Eigen::MatrixXd modes(3, model.dimension);
    for (Eigen::Index m = 0; m < modes.size(); ++m) modes.data()[m] = amplitude * coef(rng);
    OptimizerConfig cfg = config;
    cfg.initial_path = DiscretePath::from_function(config.steps, model.dimension, [&](double t) -> Vector {
      Vector v = (1.0 - t) * x_start + t * x_end;
      for (Eigen::Index m = 0; m < 3; ++m) {
        v += std::sin(static_cast<double>(m + 1) * std::numbers::pi * t) * modes.row(m).transpose();
      }
      return v;
    });
    results.push_back(minimize_om(model, x_start, x_end, cfg));
  }
  return results;
}

Vector euler_lagrange_acceleration(const SdeModel& model, double t, const Vector& y, const Vector& ydot) {
  const double dt = 1e-6;
  const double lo = std::max(0.0, t - dt);
  const double hi = std::min(1.0, t + dt);
  const Vector f = eval_drift(model, t, y);
  const Vector f_t = (eval_drift(model, hi, y) - eval_drift(model, lo, y)) / (hi - lo);
  const Matrix g = eval_diffusion(model, t);
  const Matrix g_t = (eval_diffusion(model, hi) - eval_diffusion(model, lo)) / (hi - lo);
  const Matrix jac = eval_drift_jacobian(model, t, y);
  const Matrix g_inv = mat_inverse(g);
  const Matrix ggt = g * g.transpose();
  // u = (g g^T)^{-1} (y' - f)
  const Vector u = g_inv.transpose() * (g_inv * (ydot - f));
  return f_t + jac * ydot + (g_t * g.transpose() + g * g_t.transpose()) * u - ggt * jac.transpose() * u +
         0.5 * ggt * eval_divergence_gradient(model, t, y);
}

double euler_lagrange_residual(const SdeModel& model, const DiscretePath& path) {
  if (path.dimension() != model.dimension) throw ContractError("path dimension does not match model");
  if (path.steps() < 2) throw ContractError("residual needs at least 2 steps");
  const double h = path.step_size();
  const auto& y = path.values();
  double worst = 0.0;
  for (std::size_t k = 1; k < path.steps(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const Vector v = (y.row(i + 1) - y.row(i - 1)).transpose() / (2.0 * h);
    const Vector a = (y.row(i + 1) - 2.0 * y.row(i) + y.row(i - 1)).transpose() / (h * h);
    const Vector r = a - euler_lagrange_acceleration(model, path.time(k), y.row(i).transpose(), v);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

double euler_lagrange_rhs_example1(double t, double y, double ydot) {
  const double f = t * (4.0 * y - y * y * y);
  return (4.0 * y - y * y * y) + t * (4.0 * ydot - 3.0 * y * y * ydot) + 2.0 * (ydot - f) / (1.0 + t) -
         t * (ydot - f) * (4.0 - 3.0 * y * y) - 3.0 * t * y * (1.0 + t) * (1.0 + t);
}

}  // namespace ompath
