#pragma once

#include "ompath/model.hpp"
#include "ompath/om.hpp"
#include "ompath/path.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ompath {

enum class DescentMethod {
  /// Damped Newton on the banded Hessian (finite differences of the exact
  /// gradient), Levenberg shift when the Hessian is not positive definite.
  kNewton,
  /// Polak-Ribiere+ nonlinear conjugate gradients.
  kConjugateGradient,
  kGradientDescent,
};

std::string_view to_string(DescentMethod method) noexcept;
DescentMethod parse_descent_method(std::string_view text);

struct LineSearch {
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 60;
  /// Largest change of any node value in one step.
  double max_step = 0.5;
};

struct OptimizerConfig {
  std::size_t max_iters = 5000;
  /// On the max-norm of om_path_gradient.
  double gradient_tolerance = 1e-8;
  std::size_t steps = 200;
  /// Linear interpolation between the endpoints when empty.
  std::optional<DiscretePath> initial_path;
  LineSearch line_search;
  DescentMethod method = DescentMethod::kNewton;
  OmScheme scheme = OmScheme::kMidpoint;

  void validate() const;
};

struct OptimizeResult {
  DiscretePath path;
  OmEvaluation om;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  double el_residual = 0.0;
  /// Functional value after every accepted step, starting with the initial path.
  std::vector<double> om_history;
};

/// Minimizes the discretized functional over paths pinned to x_start at t=0
/// and x_end at t=1. Running out of iterations is reported through
/// `converged`, not thrown.
OptimizeResult minimize_om(const SdeModel& model, const Vector& x_start, const Vector& x_end,
                           const OptimizerConfig& config = {});

/// Independent runs from the linear path (start 0) and from randomly
/// perturbed linear paths; results are in start order.
std::vector<OptimizeResult> minimize_om_multistart(const SdeModel& model, const Vector& x_start,
                                                   const Vector& x_end, const OptimizerConfig& config,
                                                   std::size_t starts, std::uint64_t seed);

/// Max over interior nodes of |y'' - A(t, y, y')|, where y'' = A is the
/// Euler-Lagrange equation of the OM Lagrangian solved for the acceleration
/// and y', y'' are central differences.
double euler_lagrange_residual(const SdeModel& model, const DiscretePath& path);

/// Right-hand side A(t, y, y') of the Euler-Lagrange equation for a general
/// model, derived from L = |g^{-1}(v - f)|^2 + Tr(grad f).
Vector euler_lagrange_acceleration(const SdeModel& model, double t, const Vector& y, const Vector& ydot);

/// Hand-derived acceleration for example1:
///   (4y - y^3) + t(4y' - 3y^2 y') + 2(y' - t(4y - y^3)) / (1 + t)
///   - t(y' - t(4y - y^3))(4 - 3y^2) - 3ty(1 + t)^2
double euler_lagrange_rhs_example1(double t, double y, double ydot);

using SecondOrderRhs = std::function<double(double t, double y, double ydot)>;

struct ShootingConfig {
  double slope_min = -20.0;
  double slope_max = 20.0;
  int seed_slopes = 8;
  /// The seed grid is doubled this many times while no bracket is found.
  int max_refinements = 8;
  int max_secant_iters = 100;
  double tolerance = 1e-8;
};

/// Solves y'' = rhs(t, y, y'), y(0) = y0, y(1) = y1 by shooting with RK4 on
/// `steps` uniform steps and a bracketed secant iteration on the initial
/// slope. Throws NoConvergenceError if no slope hits y1 within tolerance.
DiscretePath solve_el_bvp(const SecondOrderRhs& rhs, double y0, double y1, std::size_t steps,
                          const ShootingConfig& config = {});

/// Finite-difference Newton relaxation of the same boundary value problem;
/// second order in h. Fallback for problems where shooting is too unstable.
DiscretePath solve_el_bvp_relaxation(const SecondOrderRhs& rhs, double y0, double y1, std::size_t steps,
                                     std::size_t max_iters = 100, double tolerance = 1e-10);

}  // namespace ompath
