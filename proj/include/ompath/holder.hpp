#pragma once

#include "ompath/path.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace ompath {

/// Exponent of the alpha-Holder norm. Any alpha in (0, 1) is accepted; the
/// small-noise results only hold for alpha < 1/4 (see in_small_ball_range).
struct HolderParams {
  double alpha = 0.2;

  /// Throws ContractError unless 0 < alpha < 1.
  void validate() const;
  bool in_small_ball_range() const noexcept { return alpha > 0.0 && alpha < 0.25; }
};

/// Above this many steps the seminorm scan prunes long lags.
inline constexpr std::size_t kExactScanLimit = 4096;

// Norms on a grid of step h. For several coordinates the result is the mean of
// the per-coordinate norms. Seminorm denominators are ((k - j) h)^alpha.

double sup_norm(const Eigen::MatrixXd& values);
double holder_seminorm(const Eigen::MatrixXd& values, double h, HolderParams params);
double holder_norm(const Eigen::MatrixXd& values, double h, HolderParams params);

double sup_norm(const DiscretePath& path);
double holder_seminorm(const DiscretePath& path, HolderParams params);
double holder_norm(const DiscretePath& path, HolderParams params);

/// Reference O(N^2) scan over all node pairs j < k.
double holder_seminorm_pairwise(const Eigen::MatrixXd& values, double h, HolderParams params);

/// Same answer as holder_norm(values, h, params) <= radius, but stops
/// scanning as soon as the partial norm exceeds the radius.
bool within_holder_ball(const Eigen::MatrixXd& values, double h, HolderParams params, double radius);

}  // namespace ompath
