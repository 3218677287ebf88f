#include "ompath/model.hpp"

#include "ompath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ompath {
namespace {

double fd_step(double x) { return std::max(1e-6, 1e-6 * std::abs(x)); }

void check_state(const SdeModel& model, const Vector& x) {
  if (x.size() != model.dimension) {
    std::ostringstream os;
    os << "model '" << model.name << "' has dimension " << model.dimension << " but state has "
       << x.size() << " entries";
    throw ContractError(os.str());
  }
}

double param(const ModelParams& params, std::string_view key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Eigen::Index dimension_param(const ModelParams& params) {
  const double n = param(params, "n", 1.0);
  if (n < 1.0 || n != std::floor(n)) throw ContractError("parameter n must be a positive integer");
  return static_cast<Eigen::Index>(n);
}

void reject_unknown(const ModelParams& params, std::string_view model,
                    std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : params) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ContractError("model '" + std::string(model) + "' has no parameter '" + key + "'");
    }
  }
}

SdeModel make_example1() {
  SdeModel m;
  m.name = "example1";
  m.dimension = 1;
  m.drift = [](double t, const Vector& x) {
    const double y = x[0];
    return Vector::Constant(1, t * (4.0 * y - y * y * y));
  };
  m.diffusion = [](double t) { return Matrix::Constant(1, 1, t + 1.0); };
  m.drift_jacobian = [](double t, const Vector& x) {
    return Matrix::Constant(1, 1, t * (4.0 - 3.0 * x[0] * x[0]));
  };
  m.divergence_gradient = [](double t, const Vector& x) { return Vector::Constant(1, -6.0 * t * x[0]); };
  m.det_bounds = std::pair{1.0, 2.0};
  return m;
}

// Fast-slow volatility pair: a^2 is the fast scale, b^2 the slow one.
SdeModel make_example2(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ContractError("example2 needs scales a > 0 and b > 0");
  const double ka = 0.04 * a * a;
  const double kb = 0.04 * b * b;
  SdeModel m;
  m.name = "example2";
  m.dimension = 2;
  m.drift = [ka, kb](double, const Vector& x) {
    const double x1 = x[0], x2 = x[1];
    Vector out(2);
    out << ka * x1 * (8.0 - x1 * x2 - x1 * x1), kb * x2 * (8.0 - x1 * x2 - x2 * x2);
    return out;
  };
  m.diffusion = [a, b](double t) {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = 0.4 * a * (1.0 + t);
    g(1, 1) = 0.4 * b * (2.0 + t);
    return g;
  };
  m.drift_jacobian = [ka, kb](double, const Vector& x) {
    const double x1 = x[0], x2 = x[1];
    Matrix j(2, 2);
    j << ka * (8.0 - 2.0 * x1 * x2 - 3.0 * x1 * x1), -ka * x1 * x1,
        -kb * x2 * x2, kb * (8.0 - 2.0 * x1 * x2 - 3.0 * x2 * x2);
    return j;
  };
  m.divergence_gradient = [ka, kb](double, const Vector& x) {
    const double x1 = x[0], x2 = x[1];
    Vector out(2);
    out << -ka * (2.0 * x2 + 6.0 * x1) - kb * 2.0 * x2, -ka * 2.0 * x1 - kb * (2.0 * x1 + 6.0 * x2);
    return out;
  };
  m.det_bounds = std::pair{0.16 * a * b * 2.0, 0.16 * a * b * 6.0};
  return m;
}

SdeModel make_linear(Eigen::Index n, double rate, double g_slope) {
  SdeModel m;
  m.name = "linear_test";
  m.dimension = n;
  m.drift = [rate](double, const Vector& x) -> Vector { return rate * x; };
  m.diffusion = [n, g_slope](double t) -> Matrix {
    return (1.0 + g_slope * t) * Matrix::Identity(n, n);
  };
  m.drift_jacobian = [n, rate](double, const Vector&) -> Matrix { return rate * Matrix::Identity(n, n); };
  m.divergence_gradient = [n](double, const Vector&) -> Vector { return Vector::Zero(n); };
  m.lipschitz_bound = std::abs(rate);
  const double lo = std::min(1.0, 1.0 + g_slope);
  const double hi = std::max(1.0, 1.0 + g_slope);
  if (lo > 0.0) m.det_bounds = std::pair{std::pow(lo, n), std::pow(hi, n)};
  return m;
}

SdeModel make_zero_drift(Eigen::Index n, double sigma) {
  SdeModel m;
  m.name = "zero_drift";
  m.dimension = n;
  m.drift = [n](double, const Vector&) -> Vector { return Vector::Zero(n); };
  m.diffusion = [n, sigma](double) -> Matrix { return sigma * Matrix::Identity(n, n); };
  m.drift_jacobian = [n](double, const Vector&) -> Matrix { return Matrix::Zero(n, n); };
  m.divergence_gradient = [n](double, const Vector&) -> Vector { return Vector::Zero(n); };
  m.lipschitz_bound = 0.0;
  if (sigma != 0.0) {
    const double d = std::pow(std::abs(sigma), static_cast<double>(n));
    m.det_bounds = std::pair{d, d};
  }
  return m;
}

}  // namespace

Vector eval_drift(const SdeModel& model, double t, const Vector& x) {
  check_state(model, x);
  Vector out = model.drift(t, x);
  if (out.size() != model.dimension) throw ContractError("drift returned wrong dimension");
  return out;
}

Matrix eval_diffusion(const SdeModel& model, double t) {
  Matrix g = model.diffusion(t);
  if (g.rows() != model.dimension || g.cols() != model.dimension) {
    throw ContractError("diffusion returned wrong shape");
  }
  return g;
}

Matrix fd_drift_jacobian(const SdeModel& model, double t, const Vector& x) {
  check_state(model, x);
  const Eigen::Index n = model.dimension;
  Matrix j(n, n);
  Vector probe = x;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double h = fd_step(x[c]);
    probe[c] = x[c] + h;
    const Vector up = model.drift(t, probe);
    probe[c] = x[c] - h;
    const Vector down = model.drift(t, probe);
    probe[c] = x[c];
    j.col(c) = (up - down) / (2.0 * h);
  }
  return j;
}

Matrix eval_drift_jacobian(const SdeModel& model, double t, const Vector& x) {
  if (!model.drift_jacobian) return fd_drift_jacobian(model, t, x);
  check_state(model, x);
  Matrix j = model.drift_jacobian(t, x);
  if (j.rows() != model.dimension || j.cols() != model.dimension) {
    throw ContractError("drift Jacobian returned wrong shape");
  }
  return j;
}

Vector eval_divergence_gradient(const SdeModel& model, double t, const Vector& x) {
  check_state(model, x);
  if (model.divergence_gradient) return model.divergence_gradient(t, x);
  const Eigen::Index n = model.dimension;
  Vector grad(n);
  Vector probe = x;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double h = fd_step(x[c]);
    probe[c] = x[c] + h;
    const double up = eval_drift_jacobian(model, t, probe).trace();
    probe[c] = x[c] - h;
    const double down = eval_drift_jacobian(model, t, probe).trace();
    probe[c] = x[c];
    grad[c] = (up - down) / (2.0 * h);
  }
  return grad;
}

SdeModel builtin_model(std::string_view name, const ModelParams& params) {
  if (name == "example1") {
    reject_unknown(params, name, {});
    return make_example1();
  }
  if (name == "example2") {
    reject_unknown(params, name, {"a", "b"});
    if (!params.contains("a") || !params.contains("b")) {
      throw ContractError("example2 requires parameters a and b");
    }
    return make_example2(params.find("a")->second, params.find("b")->second);
  }
  if (name == "linear_test") {
    reject_unknown(params, name, {"n", "a", "g_slope"});
    return make_linear(dimension_param(params), param(params, "a", -1.0), param(params, "g_slope", 0.0));
  }
  if (name == "zero_drift") {
    reject_unknown(params, name, {"n", "sigma"});
    return make_zero_drift(dimension_param(params), param(params, "sigma", 1.0));
  }
  throw ContractError("unknown model '" + std::string(name) + "'");
}

std::vector<std::string> builtin_model_names() {
  return {"example1", "example2", "linear_test", "zero_drift"};
}

std::optional<std::pair<Vector, Vector>> default_endpoints(std::string_view name) {
  if (name == "example1") return std::pair{Vector::Constant(1, -2.0), Vector::Constant(1, 2.0)};
  if (name == "example2") return std::pair{Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)};
  return std::nullopt;
}

ConditionReport check_conditions(const SdeModel& model, bool strict, int probes, unsigned seed) {
  ConditionReport report;
  auto flag = [&](std::string message) {
    if (strict) throw ContractError(model.name + ": " + message);
    report.warnings.push_back(std::move(message));
  };

  constexpr int kTimes = 101;
  for (int k = 0; k < kTimes; ++k) {
    const double t = static_cast<double>(k) / (kTimes - 1);
    const Matrix g = eval_diffusion(model, t);
    const double det = std::abs(g.determinant());
    if (model.det_bounds) {
      const auto [lo, hi] = *model.det_bounds;
      if (det < lo * (1.0 - 1e-12) || det > hi * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "|det g(" << t << ")| = " << det << " outside [" << lo << ", " << hi << "]";
        flag(os.str());
        break;
      }
    }
    const double scale = g.rowwise().norm().prod();
    if (!(det > 1e-12 * scale) || scale == 0.0) {
      std::ostringstream os;
      os << "g(" << t << ") is singular";
      flag(os.str());
      break;
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time_dist(0.0, 1.0);
  std::uniform_real_distribution<double> state_dist(-3.0, 3.0);
  for (int p = 0; p < probes; ++p) {
    const double t = time_dist(rng);
    Vector x(model.dimension);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = state_dist(rng);
    const Matrix j = eval_drift_jacobian(model, t, x);
    if (model.drift_jacobian) {
      const Matrix fd = fd_drift_jacobian(model, t, x);
      const double err = (j - fd).cwiseAbs().maxCoeff();
      if (err > 1e-5 * std::max(1.0, j.cwiseAbs().maxCoeff())) {
        flag("analytic drift Jacobian disagrees with finite differences");
        break;
      }
    }
    if (model.lipschitz_bound) {
      const double op_norm = Eigen::JacobiSVD<Matrix>(j).singularValues()(0);
      if (op_norm > *model.lipschitz_bound * (1.0 + 1e-9) + 1e-12) {
        flag("drift Jacobian norm exceeds the Lipschitz bound");
        break;
      }
    }
  }
  return report;
}

}  // namespace ompath
