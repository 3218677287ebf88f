#include "ompath/simulate.hpp"

#include "ompath/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

namespace ompath {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate(const SimulationSpec& spec) {
  if (spec.steps < 2) throw ContractError("simulation needs at least 2 steps");
  if (spec.samples < 1) throw ContractError("simulation needs at least 1 sample");
  if (spec.x0.size() != spec.model.dimension) {
    throw ContractError("initial state has " + std::to_string(spec.x0.size()) +
                        " entries, model dimension is " + std::to_string(spec.model.dimension));
  }
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OMPATH_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

Eigen::MatrixXd brownian_increments(Eigen::Index dimension, std::size_t steps, std::uint64_t seed,
                                    std::uint64_t stream) {
  std::mt19937_64 rng(stream_seed(seed, stream));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(1.0 / static_cast<double>(steps));
  Eigen::MatrixXd dw(static_cast<Eigen::Index>(steps), dimension);
  for (Eigen::Index k = 0; k < dw.rows(); ++k) {
    for (Eigen::Index i = 0; i < dimension; ++i) dw(k, i) = scale * normal(rng);
  }
  return dw;
}

DiscretePath euler_maruyama_driven(const SdeModel& model, const Vector& x0,
                                   const Eigen::MatrixXd& increments) {
  if (x0.size() != model.dimension || increments.cols() != model.dimension) {
    throw ContractError("initial state or increments do not match model dimension");
  }
  const auto steps = static_cast<std::size_t>(increments.rows());
  DiscretePath path(steps, model.dimension);
  const double h = path.step_size();
  Vector x = x0;
  path.values().row(0) = x.transpose();
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = path.time(k);
    const auto row = static_cast<Eigen::Index>(k);
    x += eval_drift(model, t, x) * h + eval_diffusion(model, t) * increments.row(row).transpose();
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw SimulationDivergedError(k + 1, std::nullopt);
    }
    path.values().row(row + 1) = x.transpose();
  }
  return path;
}

DiscretePath simulate_sample(const SimulationSpec& spec, std::size_t index) {
  validate(spec);
  const auto dw = brownian_increments(spec.model.dimension, spec.steps, spec.seed, index);
  try {
    return euler_maruyama_driven(spec.model, spec.x0, dw);
  } catch (const SimulationDivergedError& e) {
    throw SimulationDivergedError(e.step(), index);
  }
}

DiscretePath euler_maruyama(const SimulationSpec& spec) { return simulate_sample(spec, 0); }

std::vector<DiscretePath> simulate_ensemble(const SimulationSpec& spec, unsigned workers) {
  validate(spec);
  return map_ensemble(spec, [](std::size_t, const DiscretePath& p) { return p; }, workers);
}

}  // namespace ompath
