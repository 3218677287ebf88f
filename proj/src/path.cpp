#include "ompath/path.hpp"

#include "ompath/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace ompath {

DiscretePath::DiscretePath(std::size_t steps, Eigen::Index dimension)
    : steps_(steps), values_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps) + 1, dimension)) {
  if (steps < 1) throw ContractError("path needs at least one step");
  if (dimension < 1) throw ContractError("path dimension must be positive");
}

DiscretePath::DiscretePath(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 2) throw ContractError("path needs at least two nodes");
  if (values_.cols() < 1) throw ContractError("path dimension must be positive");
  steps_ = static_cast<std::size_t>(values_.rows() - 1);
}

DiscretePath DiscretePath::from_grid(std::span<const double> times, Eigen::MatrixXd values) {
  if (times.size() != static_cast<std::size_t>(values.rows())) {
    throw ContractError("grid has " + std::to_string(times.size()) + " times but values have " +
                        std::to_string(values.rows()) + " rows");
  }
  DiscretePath path(std::move(values));
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - path.time(k)) > 1e-12) {
      throw ContractError("grid is not uniform on [0, 1] at node " + std::to_string(k));
    }
  }
  return path;
}

DiscretePath DiscretePath::linear(const Eigen::VectorXd& start, const Eigen::VectorXd& end,
                                  std::size_t steps) {
  if (start.size() != end.size()) throw ContractError("endpoint dimensions differ");
  return from_function(steps, start.size(), [&](double t) -> Eigen::VectorXd {
    return (1.0 - t) * start + t * end;
  });
}

DiscretePath DiscretePath::from_function(std::size_t steps, Eigen::Index dimension,
                                         const std::function<Eigen::VectorXd(double)>& fn) {
  DiscretePath path(steps, dimension);
  for (std::size_t k = 0; k <= steps; ++k) {
    Eigen::VectorXd v = fn(path.time(k));
    if (v.size() != dimension) throw ContractError("path function returned wrong dimension");
    path.values_.row(static_cast<Eigen::Index>(k)) = v.transpose();
  }
  return path;
}

DiscretePath DiscretePath::subsample(std::size_t stride) const {
  if (stride == 0 || steps_ % stride != 0) {
    throw ContractError("cannot subsample " + std::to_string(steps_) + " steps by " +
                        std::to_string(stride));
  }
  DiscretePath out(steps_ / stride, dimension());
  for (std::size_t k = 0; k <= out.steps_; ++k) {
    out.values_.row(static_cast<Eigen::Index>(k)) = values_.row(static_cast<Eigen::Index>(k * stride));
  }
  return out;
}

}  // namespace ompath
