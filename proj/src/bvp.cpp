#include "ompath/errors.hpp"
#include "ompath/optimize.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

namespace ompath {
namespace {

constexpr double kBlowUp = 1e6;

struct Trajectory {
  std::vector<double> y;
  double end_mismatch = 0.0;
};

// RK4 for (y, y')' = (y', rhs). Empty when the trajectory blows up.
std::optional<Trajectory> integrate(const SecondOrderRhs& rhs, double y0, double slope, double y1,
                                    std::size_t steps) {
  const double h = 1.0 / static_cast<double>(steps);
  Trajectory out;
  out.y.reserve(steps + 1);
  double y = y0;
  double v = slope;
  out.y.push_back(y);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const double k1y = v, k1v = rhs(t, y, v);
    const double k2y = v + 0.5 * h * k1v, k2v = rhs(t + 0.5 * h, y + 0.5 * h * k1y, k2y);
    const double k3y = v + 0.5 * h * k2v, k3v = rhs(t + 0.5 * h, y + 0.5 * h * k2y, k3y);
    const double k4y = v + h * k3v, k4v = rhs(t + h, y + h * k3y, k4y);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!std::isfinite(y) || !std::isfinite(v) || std::abs(y) > kBlowUp || std::abs(v) > kBlowUp) {
      return std::nullopt;
    }
    out.y.push_back(y);
  }
  out.end_mismatch = y - y1;
  return out;
}

DiscretePath to_path(const std::vector<double>& y) {
  Eigen::MatrixXd values(static_cast<Eigen::Index>(y.size()), 1);
  for (std::size_t k = 0; k < y.size(); ++k) values(static_cast<Eigen::Index>(k), 0) = y[k];
  return DiscretePath(std::move(values));
}

// Solves a tridiagonal system in place (Thomas algorithm); lower[0] and
// upper[m - 1] are ignored.
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t m = diag.size();
  for (std::size_t i = 1; i < m; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(m);
  x[m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

}  // namespace

DiscretePath solve_el_bvp(const SecondOrderRhs& rhs, double y0, double y1, std::size_t steps,
                          const ShootingConfig& config) {
  if (steps < 2) throw ContractError("shooting needs at least 2 steps");
  if (!(config.slope_max > config.slope_min) || config.seed_slopes < 2) {
    throw ContractError("shooting needs a nonempty slope bracket and at least 2 seed slopes");
  }

  auto shoot = [&](double s) { return integrate(rhs, y0, s, y1, steps); };

  // Scan seed slopes, refining the grid until two neighbouring finite
  // trajectories straddle the target.
  std::optional<std::pair<double, double>> bracket;
  std::pair<double, double> bracket_mismatch{};
  for (int level = 0; level <= config.max_refinements && !bracket; ++level) {
    const int count = (config.seed_slopes - 1) * (1 << level) + 1;
    std::optional<std::pair<double, double>> previous;  // (slope, mismatch)
    for (int i = 0; i < count; ++i) {
      const double s = config.slope_min + (config.slope_max - config.slope_min) * i / (count - 1);
      const auto traj = shoot(s);
      if (!traj) {
        previous.reset();
        continue;
      }
      if (std::abs(traj->end_mismatch) <= config.tolerance) return to_path(traj->y);
      if (previous && (previous->second < 0.0) != (traj->end_mismatch < 0.0)) {
        bracket = std::pair{previous->first, s};
        bracket_mismatch = {previous->second, traj->end_mismatch};
        break;
      }
      previous = std::pair{s, traj->end_mismatch};
    }
  }
  if (!bracket) {
    throw NoConvergenceError(
        "shooting found no initial slope bracketing the boundary value; try solve_el_bvp_relaxation");
  }

  // Illinois variant of regula falsi: secant steps that keep the bracket.
  auto [lo, hi] = *bracket;
  auto [m_lo, m_hi] = bracket_mismatch;
  int stale_side = 0;
  for (int it = 0; it < config.max_secant_iters; ++it) {
    double s = (lo * m_hi - hi * m_lo) / (m_hi - m_lo);
    auto traj = shoot(s);
    if (!traj) {
      s = 0.5 * (lo + hi);
      traj = shoot(s);
      if (!traj) break;
    }
    const double m = traj->end_mismatch;
    if (std::abs(m) <= config.tolerance) return to_path(traj->y);
    if ((m < 0.0) == (m_lo < 0.0)) {
      lo = s;
      m_lo = m;
      if (stale_side == -1) m_hi *= 0.5;
      stale_side = -1;
    } else {
      hi = s;
      m_hi = m;
      if (stale_side == 1) m_lo *= 0.5;
      stale_side = 1;
    }
  }
  std::ostringstream os;
  os << "shooting did not reach |y(1) - " << y1 << "| <= " << config.tolerance << " within "
     << config.max_secant_iters << " secant iterations; try solve_el_bvp_relaxation";
  throw NoConvergenceError(os.str());
}

DiscretePath solve_el_bvp_relaxation(const SecondOrderRhs& rhs, double y0, double y1, std::size_t steps,
                                     std::size_t max_iters, double tolerance) {
  if (steps < 3) throw ContractError("relaxation needs at least 3 steps");
  const double h = 1.0 / static_cast<double>(steps);
  const std::size_t m = steps - 1;
  std::vector<double> y(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) y[k] = y0 + (y1 - y0) * static_cast<double>(k) * h;

  auto residual = [&](const std::vector<double>& p, std::vector<double>& out) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t k = i + 1;
      const double t = static_cast<double>(k) * h;
      const double v = (p[k + 1] - p[k - 1]) / (2.0 * h);
      out[i] = (p[k + 1] - 2.0 * p[k] + p[k - 1]) / (h * h) - rhs(t, p[k], v);
      worst = std::max(worst, std::abs(out[i]));
    }
    return worst;
  };

  std::vector<double> r(m);
  double norm = residual(y, r);
  for (std::size_t it = 0; it < max_iters; ++it) {
    std::vector<double> lower(m), diag(m), upper(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t k = i + 1;
      const double t = static_cast<double>(k) * h;
      const double v = (y[k + 1] - y[k - 1]) / (2.0 * h);
      const double dy = 1e-6 * std::max(1.0, std::abs(y[k]));
      const double dv = 1e-6 * std::max(1.0, std::abs(v));
      const double r_y = (rhs(t, y[k] + dy, v) - rhs(t, y[k] - dy, v)) / (2.0 * dy);
      const double r_v = (rhs(t, y[k], v + dv) - rhs(t, y[k], v - dv)) / (2.0 * dv);
      lower[i] = 1.0 / (h * h) + r_v / (2.0 * h);
      diag[i] = -2.0 / (h * h) - r_y;
      upper[i] = 1.0 / (h * h) - r_v / (2.0 * h);
    }
    std::vector<double> neg(m);
    for (std::size_t i = 0; i < m; ++i) neg[i] = -r[i];
    const std::vector<double> delta = solve_tridiagonal(lower, diag, upper, neg);

    double step_norm = 0.0;
    for (double d : delta) step_norm = std::max(step_norm, std::abs(d));

    // Halve the Newton step until the residual decreases.
    double lambda = 1.0;
    std::vector<double> trial(y);
    std::vector<double> r_trial(m);
    double trial_norm = norm;
    for (int b = 0; b < 30; ++b, lambda *= 0.5) {
      for (std::size_t i = 0; i < m; ++i) trial[i + 1] = y[i + 1] + lambda * delta[i];
      trial_norm = residual(trial, r_trial);
      if (std::isfinite(trial_norm) && trial_norm < norm) break;
    }
    if (!(std::isfinite(trial_norm) && trial_norm < norm) && step_norm > tolerance) {
      throw NoConvergenceError("relaxation stalled: residual did not decrease");
    }
    if (std::isfinite(trial_norm) && trial_norm < norm) {
      y = trial;
      r = r_trial;
      norm = trial_norm;
    }
    if (lambda * step_norm <= tolerance) return to_path(y);
  }
  throw NoConvergenceError("relaxation did not converge within the iteration limit");
}

}  // namespace ompath
