#include "ompath/experiments.hpp"

#include "ompath/errors.hpp"
#include "ompath/holder.hpp"

#include <algorithm>

namespace ompath {

Example1Run run_example1(const OptimizerConfig& config) {
  const SdeModel model = builtin_model("example1");
  const auto [x0, x1] = *default_endpoints("example1");

  Example1Run run;
  run.minimizer = minimize_om(model, x0, x1, config);
  run.shooting = solve_el_bvp(euler_lagrange_rhs_example1, x0[0], x1[0], config.steps);
  run.shooting_om = om_functional(model, run.shooting, config.scheme);
  run.shooting_el_residual = euler_lagrange_residual(model, run.shooting);
  run.max_difference = (run.minimizer.path.values() - run.shooting.values()).cwiseAbs().maxCoeff();
  return run;
}

std::vector<Example2Run> run_example2_sweep(const std::vector<std::pair<double, double>>& scales,
                                            const OptimizerConfig& config) {
  const auto [x0, x1] = *default_endpoints("example2");
  std::vector<Example2Run> runs;
  runs.reserve(scales.size());
  for (const auto& [a, b] : scales) {
    const SdeModel model = builtin_model("example2", {{"a", a}, {"b", b}});

    std::vector<Example2Run> candidates;
    OptimizerConfig cold = config;
    cold.initial_path.reset();
    candidates.push_back({a, b, minimize_om(model, x0, x1, cold), "linear"});
    if (!runs.empty() && runs.back().result.converged) {
      OptimizerConfig warm = config;
      warm.initial_path = runs.back().result.path;
      candidates.push_back({a, b, minimize_om(model, x0, x1, warm), "continuation"});
    }

    auto best = std::min_element(candidates.begin(), candidates.end(), [](const auto& l, const auto& r) {
      if (l.result.converged != r.result.converged) return l.result.converged;
      if (l.result.converged) return l.result.om.total < r.result.om.total;
      return l.result.gradient_norm < r.result.gradient_norm;
    });
    runs.push_back(std::move(*best));
  }
  return runs;
}

bool strictly_monotone_om(const std::vector<Example2Run>& runs) {
  if (runs.size() < 2) return true;
  bool increasing = true;
  bool decreasing = true;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const double prev = runs[i - 1].result.om.total;
    const double cur = runs[i].result.om.total;
    increasing = increasing && cur > prev;
    decreasing = decreasing && cur < prev;
  }
  return increasing || decreasing;
}

RatioExperiment run_linear_ratio_experiment(const RatioExperimentConfig& config) {
  const SdeModel model = builtin_model("linear_test", {{"a", -1.0}});
  const Vector x0 = Vector::Zero(1);
  const Vector x1 = Vector::Ones(1);

  OptimizerConfig opt;
  opt.steps = config.reference_steps;
  opt.gradient_tolerance = 1e-10;
  const OptimizeResult best = minimize_om(model, x0, x1, opt);
  if (!best.converged) throw NoConvergenceError("reference minimizer for the ratio experiment did not converge");

  RatioExperiment out;
  out.minimizer = best.path;
  out.straight = DiscretePath::linear(x0, x1, config.reference_steps);

  RatioOptions options;
  options.epsilon = config.epsilon;
  options.holder = config.holder;
  options.samples = config.samples;

  if (config.tube_steps) {
    out.tube_steps = *config.tube_steps;
  } else {
    std::vector<std::size_t> candidates = config.tube_candidates;
    std::sort(candidates.rbegin(), candidates.rend());
    options.seed = config.seed + 1;
    for (std::size_t n : candidates) {
      if (config.reference_steps % n != 0) continue;
      options.tube_steps = n;
      const RatioCheck pilot = om_ratio_check(model, out.minimizer, out.straight, options);
      if (pilot.first.hits >= config.min_hits && pilot.second.hits >= config.min_hits) {
        out.tube_steps = n;
        break;
      }
    }
    if (out.tube_steps == 0) throw NoConvergenceError("no candidate tube grid reached the hit threshold");
  }

  options.seed = config.seed;
  options.tube_steps = out.tube_steps;
  out.check = om_ratio_check(model, out.minimizer, out.straight, options);
  return out;
}

}  // namespace ompath
