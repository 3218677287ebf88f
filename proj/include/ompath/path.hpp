#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>

namespace ompath {

/// Path sampled on the uniform grid t_k = k / N, k = 0..N.
///
/// values() holds one row per node and one column per state coordinate.
/// Grid times are always k * h with h = 1 / N, so time differences between
/// nodes are exact multiples of h.
class DiscretePath {
 public:
  DiscretePath() = default;
  DiscretePath(std::size_t steps, Eigen::Index dimension);
  explicit DiscretePath(Eigen::MatrixXd values);

  /// Accepts explicit times; they must be uniform on [0, 1] to 1e-12.
  static DiscretePath from_grid(std::span<const double> times, Eigen::MatrixXd values);
  static DiscretePath linear(const Eigen::VectorXd& start, const Eigen::VectorXd& end,
                             std::size_t steps);
  static DiscretePath from_function(std::size_t steps, Eigen::Index dimension,
                                    const std::function<Eigen::VectorXd(double)>& fn);

  std::size_t steps() const noexcept { return steps_; }
  Eigen::Index dimension() const noexcept { return values_.cols(); }
  double step_size() const noexcept { return 1.0 / static_cast<double>(steps_); }
  double time(std::size_t k) const noexcept {
    return static_cast<double>(k) / static_cast<double>(steps_);
  }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::MatrixXd& values() noexcept { return values_; }
  Eigen::VectorXd node(std::size_t k) const { return values_.row(static_cast<Eigen::Index>(k)).transpose(); }

  /// Keeps every `stride`-th node; steps() must be divisible by stride.
  DiscretePath subsample(std::size_t stride) const;

 private:
  std::size_t steps_ = 0;
  Eigen::MatrixXd values_;
};

}  // namespace ompath
