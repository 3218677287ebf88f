#pragma once

#include "ompath/model.hpp"
#include "ompath/path.hpp"

#include <cstddef>

namespace ompath {

/// Value of the Onsager-Machlup functional
///
///   OM(phi) = int_0^1 |g(t)^{-1} (phi'(t) - f(t, phi(t)))|^2 dt
///           + int_0^1 Tr(g(t)^{-1} grad f(t, phi(t)) g(t)) dt
///
/// reported without the 1/2 that appears in the tube asymptotics.
struct OmEvaluation {
  double total = 0.0;
  double drift_term = 0.0;
  double divergence_term = 0.0;
  std::size_t grid_size = 0;
};

/// How the integral is discretized on a path's grid.
///
/// kMidpoint evaluates the integrand once per cell at the cell midpoint with
/// the forward difference as velocity. The forward difference sees every node
/// pair, so minimizers carry no odd-even oscillation. This is what the
/// optimizer uses.
///
/// kNodalTrapezoid evaluates at the nodes with central differences (second
/// order one-sided at the ends) and integrates with the trapezoid rule. It is
/// a cross-check for evaluating given paths; its discrete minimizers are not
/// reliable because central differences ignore alternating perturbations.
enum class OmScheme { kMidpoint, kNodalTrapezoid };

/// |det| below this times the product of row norms counts as singular.
inline constexpr double kSingularityThreshold = 1e-12;

/// Inverse of a square matrix; throws SingularMatrixError carrying the
/// determinant when the matrix is numerically singular.
Matrix mat_inverse(const Matrix& m);

/// Tr(g(t)^{-1} grad f(t, x) g(t)), computed literally.
double divergence_term(const SdeModel& model, double t, const Vector& x);

/// Tr(grad f(t, x)); equal to divergence_term by trace similarity.
double divergence_term_simplified(const SdeModel& model, double t, const Vector& x);

/// |g^{-1} (xdot - f)|^2 + divergence term.
double om_integrand(const SdeModel& model, double t, const Vector& x, const Vector& xdot);

OmEvaluation om_functional(const SdeModel& model, const DiscretePath& path,
                           OmScheme scheme = OmScheme::kMidpoint);

/// Exact gradient of om_functional(model, path, scheme).total with respect to
/// the interior node values; row k - 1 belongs to node k. Endpoints are fixed.
Eigen::MatrixXd om_path_gradient(const SdeModel& model, const DiscretePath& path,
                                 OmScheme scheme = OmScheme::kMidpoint);

/// Largest node distance coupled by the scheme's Hessian.
std::size_t om_hessian_bandwidth(OmScheme scheme) noexcept;

}  // namespace ompath
