#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ompath {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Additive-noise SDE  dX = f(t, X) dt + g(t) dW  on t in [0, 1].
///
/// Models are immutable bundles of pure functions. The optional members fall
/// back to finite differences when empty:
///  - drift_jacobian(t, x)(i, j) = d f_i / d x_j
///  - divergence_gradient(t, x) = gradient in x of Tr(drift_jacobian(t, x))
struct SdeModel {
  using DriftFn = std::function<Vector(double, const Vector&)>;
  using DiffusionFn = std::function<Matrix(double)>;
  using JacobianFn = std::function<Matrix(double, const Vector&)>;

  std::string name;
  Eigen::Index dimension = 1;
  DriftFn drift;
  DiffusionFn diffusion;
  JacobianFn drift_jacobian;
  DriftFn divergence_gradient;
  std::optional<double> lipschitz_bound;
  /// (m, M) with m <= |det g(t)| <= M on [0, 1].
  std::optional<std::pair<double, double>> det_bounds;
};

using ModelParams = std::map<std::string, double, std::less<>>;

Vector eval_drift(const SdeModel& model, double t, const Vector& x);
Matrix eval_diffusion(const SdeModel& model, double t);

/// Analytic Jacobian when the model has one, else central differences with
/// per-coordinate step max(1e-6, 1e-6 |x_j|).
Matrix eval_drift_jacobian(const SdeModel& model, double t, const Vector& x);
Matrix fd_drift_jacobian(const SdeModel& model, double t, const Vector& x);

/// Gradient of Tr(grad f) with respect to x.
Vector eval_divergence_gradient(const SdeModel& model, double t, const Vector& x);

/// Built-in models: example1, example2 (params a, b), linear_test
/// (params n, a, g_slope), zero_drift (params n, sigma).
SdeModel builtin_model(std::string_view name, const ModelParams& params = {});
std::vector<std::string> builtin_model_names();

/// Metastable states used as default endpoints, when the model has them.
std::optional<std::pair<Vector, Vector>> default_endpoints(std::string_view name);

struct ConditionReport {
  std::vector<std::string> warnings;
  bool ok() const noexcept { return warnings.empty(); }
};

/// Probes the regularity conditions on f and g (Lipschitz bound, determinant
/// bounds, invertibility of g, Jacobian consistency) on a grid of times and
/// random states in [-3, 3]^n. Violations are warnings unless `strict`, in
/// which case the first one throws ContractError.
ConditionReport check_conditions(const SdeModel& model, bool strict = false, int probes = 100,
                                 unsigned seed = 1);

}  // namespace ompath
