#include "ompath/holder.hpp"

#include "ompath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ompath {
namespace {

void check_values(const Eigen::MatrixXd& values) {
  if (values.rows() < 1 || values.cols() < 1) throw ContractError("empty path");
}

double lag_span(std::size_t lag, double h, double alpha) {
  return std::pow(static_cast<double>(lag) * h, alpha);
}

// Largest |x_{j+lag} - x_j| over j for one coordinate.
double max_increment(const Eigen::MatrixXd& values, Eigen::Index col, Eigen::Index lag) {
  const Eigen::Index rows = values.rows();
  double best = 0.0;
  for (Eigen::Index j = 0; j + lag < rows; ++j) {
    best = std::max(best, std::abs(values(j + lag, col) - values(j, col)));
  }
  return best;
}

// Seminorm of one coordinate. `stop_above` lets callers abandon the scan as
// soon as the running value passes a threshold; the return is then only a
// lower bound.
template <typename StopFn>
double coordinate_seminorm(const Eigen::MatrixXd& values, Eigen::Index col, double h, double alpha,
                           StopFn&& stop) {
  const auto steps = static_cast<std::size_t>(values.rows() - 1);
  const bool prune = steps > kExactScanLimit;
  const double range = values.col(col).maxCoeff() - values.col(col).minCoeff();
  double best = 0.0;
  for (std::size_t lag = 1; lag <= steps; ++lag) {
    const double span = lag_span(lag, h, alpha);
    // Increments never exceed the coordinate's range and spans grow with
    // the lag, so no longer lag can beat `best` once this bound fails.
    if (prune && range / span <= best) break;
    const double candidate = max_increment(values, col, static_cast<Eigen::Index>(lag)) / span;
    if (candidate > best) {
      best = candidate;
      if (stop(best)) break;
    }
  }
  return best;
}

double coordinate_sup(const Eigen::MatrixXd& values, Eigen::Index col) {
  return values.col(col).cwiseAbs().maxCoeff();
}

}  // namespace

void HolderParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ContractError("Holder exponent must lie in (0, 1), got " + std::to_string(alpha));
  }
}

double sup_norm(const Eigen::MatrixXd& values) {
  check_values(values);
  double sum = 0.0;
  for (Eigen::Index c = 0; c < values.cols(); ++c) sum += coordinate_sup(values, c);
  return sum / static_cast<double>(values.cols());
}

double holder_seminorm(const Eigen::MatrixXd& values, double h, HolderParams params) {
  check_values(values);
  params.validate();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    sum += coordinate_seminorm(values, c, h, params.alpha, [](double) { return false; });
  }
  return sum / static_cast<double>(values.cols());
}

double holder_norm(const Eigen::MatrixXd& values, double h, HolderParams params) {
  return sup_norm(values) + holder_seminorm(values, h, params);
}

double holder_seminorm_pairwise(const Eigen::MatrixXd& values, double h, HolderParams params) {
  check_values(values);
  params.validate();
  const Eigen::Index rows = values.rows();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    double best = 0.0;
    for (Eigen::Index k = 1; k < rows; ++k) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double span = lag_span(static_cast<std::size_t>(k - j), h, params.alpha);
        best = std::max(best, std::abs(values(k, c) - values(j, c)) / span);
      }
    }
    sum += best;
  }
  return sum / static_cast<double>(values.cols());
}

double sup_norm(const DiscretePath& path) { return sup_norm(path.values()); }

double holder_seminorm(const DiscretePath& path, HolderParams params) {
  return holder_seminorm(path.values(), path.step_size(), params);
}

double holder_norm(const DiscretePath& path, HolderParams params) {
  return holder_norm(path.values(), path.step_size(), params);
}

bool within_holder_ball(const Eigen::MatrixXd& values, double h, HolderParams params, double radius) {
  check_values(values);
  params.validate();
  const Eigen::Index n = values.cols();
  const auto dim = static_cast<double>(n);
  const double sup = sup_norm(values);
  if (sup > radius) return false;

  // Partial seminorms only grow during the scan, and the final norm is
  // assembled with the same operation order, so the bound below never
  // exceeds the final value.
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
  auto bound = [&] {
    double sum = 0.0;
    for (double p : partial) sum += p;
    return sup + sum / dim;
  };
  for (Eigen::Index c = 0; c < n; ++c) {
    const double semi = coordinate_seminorm(values, c, h, params.alpha, [&](double running) {
      partial[static_cast<std::size_t>(c)] = running;
      return bound() > radius;
    });
    partial[static_cast<std::size_t>(c)] = semi;
    if (bound() > radius) return false;
  }
  return bound() <= radius;
}

}  // namespace ompath
