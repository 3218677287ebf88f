#include "ompath/tube.hpp"

#include "ompath/errors.hpp"
#include "ompath/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ompath {
namespace {

constexpr double kOutside = std::numeric_limits<double>::infinity();

void validate_radius(double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("tube radius must be positive");
}

// Holder norm of (path - reference) if it is at most `radius`, else +inf.
double distance_within(const DiscretePath& path, const DiscretePath& reference, HolderParams holder,
                       double radius) {
  const Eigen::MatrixXd diff = path.values() - reference.values();
  if (!within_holder_ball(diff, path.step_size(), holder, radius)) return kOutside;
  return holder_norm(diff, path.step_size(), holder);
}

SimulationSpec spec_for(const SdeModel& model, const DiscretePath& reference, std::size_t samples,
                        std::uint64_t seed) {
  if (reference.dimension() != model.dimension) {
    throw ContractError("reference path dimension does not match model");
  }
  if (samples < 1) throw ContractError("tube estimate needs at least one sample");
  return SimulationSpec{model, reference.node(0), reference.steps(), seed, samples};
}

struct PairDistance {
  double first = kOutside;
  double second = kOutside;
};

RatioCheck summarize(std::size_t hits1, std::size_t hits2, std::size_t joint, std::size_t samples,
                     double epsilon, double alpha, double om1, double om2) {
  RatioCheck out;
  out.first = make_estimate(hits1, samples, epsilon, alpha);
  out.second = make_estimate(hits2, samples, epsilon, alpha);
  out.joint_hits = joint;
  out.om_first = om1;
  out.om_second = om2;
  out.om_prediction = -0.5 * (om1 - om2);
  if (hits1 == 0 || hits2 == 0) {
    out.inconclusive = true;
    out.agreement = std::numeric_limits<double>::quiet_NaN();
    out.standard_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const auto n = static_cast<double>(samples);
  const double p1 = static_cast<double>(hits1) / n;
  const double p2 = static_cast<double>(hits2) / n;
  const double p12 = static_cast<double>(joint) / n;
  const double var = ((1.0 - p1) / p1 + (1.0 - p2) / p2 - 2.0 * (p12 - p1 * p2) / (p1 * p2)) / n;
  out.log_prob_ratio = std::log(p1 / p2);
  out.standard_error = std::sqrt(std::max(0.0, var));
  out.agreement = std::abs(out.log_prob_ratio - out.om_prediction);
  return out;
}

}  // namespace

TubeEstimate make_estimate(std::size_t hits, std::size_t samples, double epsilon, double alpha) {
  TubeEstimate e;
  e.hits = hits;
  e.samples = samples;
  e.probability = samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(samples);
  e.standard_error = samples == 0 ? 0.0 : std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(samples));
  e.epsilon = epsilon;
  e.alpha = alpha;
  e.low_statistics = hits == 0;
  return e;
}

TubeEstimate tube_probability(const TubeQuery& query) {
  validate_radius(query.epsilon);
  query.holder.validate();
  const SimulationSpec spec = spec_for(query.model, query.reference, query.samples, query.seed);
  const auto inside = map_ensemble(spec, [&](std::size_t, const DiscretePath& path) -> char {
    const Eigen::MatrixXd diff = path.values() - query.reference.values();
    return within_holder_ball(diff, path.step_size(), query.holder, query.epsilon) ? 1 : 0;
  });
  const auto hits = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), char{1}));
  return make_estimate(hits, query.samples, query.epsilon, query.holder.alpha);
}

std::vector<TubeEstimate> tube_probability_ladder(const TubeQuery& query, std::span<const double> epsilons) {
  if (epsilons.empty()) return {};
  for (double e : epsilons) validate_radius(e);
  query.holder.validate();
  const double widest = *std::max_element(epsilons.begin(), epsilons.end());
  const SimulationSpec spec = spec_for(query.model, query.reference, query.samples, query.seed);
  const auto distances = map_ensemble(spec, [&](std::size_t, const DiscretePath& path) {
    return distance_within(path, query.reference, query.holder, widest);
  });
  std::vector<TubeEstimate> out;
  out.reserve(epsilons.size());
  for (double e : epsilons) {
    const auto hits = static_cast<std::size_t>(
        std::count_if(distances.begin(), distances.end(), [e](double d) { return d <= e; }));
    out.push_back(make_estimate(hits, query.samples, e, query.holder.alpha));
  }
  return out;
}

std::vector<RatioCheck> om_ratio_ladder(const SdeModel& model, const DiscretePath& first,
                                        const DiscretePath& second, std::span<const double> epsilons,
                                        const RatioOptions& options) {
  if (epsilons.empty()) return {};
  for (double e : epsilons) validate_radius(e);
  options.holder.validate();
  if (first.steps() != second.steps() || first.dimension() != second.dimension()) {
    throw ContractError("reference paths must share grid and dimension");
  }
  if ((first.node(0) - second.node(0)).cwiseAbs().maxCoeff() > 1e-12) {
    throw ContractError("reference paths must start at the same point");
  }
  const std::size_t tube_steps = options.tube_steps == 0 ? first.steps() : options.tube_steps;
  if (first.steps() % tube_steps != 0) {
    throw ContractError("reference grid must be a refinement of the tube grid");
  }
  const std::size_t stride = first.steps() / tube_steps;

  const double om1 = om_functional(model, first, options.scheme).total;
  const double om2 = om_functional(model, second, options.scheme).total;

  const DiscretePath tube1 = first.subsample(stride);
  const DiscretePath tube2 = second.subsample(stride);
  const double widest = *std::max_element(epsilons.begin(), epsilons.end());
  const SimulationSpec spec = spec_for(model, tube1, options.samples, options.seed);
  const auto distances = map_ensemble(spec, [&](std::size_t, const DiscretePath& path) {
    return PairDistance{distance_within(path, tube1, options.holder, widest),
                        distance_within(path, tube2, options.holder, widest)};
  });

  std::vector<RatioCheck> out;
  out.reserve(epsilons.size());
  for (double e : epsilons) {
    std::size_t h1 = 0, h2 = 0, joint = 0;
    for (const auto& d : distances) {
      const bool in1 = d.first <= e;
      const bool in2 = d.second <= e;
      h1 += in1;
      h2 += in2;
      joint += in1 && in2;
    }
    out.push_back(summarize(h1, h2, joint, options.samples, e, options.holder.alpha, om1, om2));
  }
  return out;
}

RatioCheck om_ratio_check(const SdeModel& model, const DiscretePath& first, const DiscretePath& second,
                          const RatioOptions& options) {
  const double eps[] = {options.epsilon};
  return om_ratio_ladder(model, first, second, eps, options).front();
}

}  // namespace ompath
