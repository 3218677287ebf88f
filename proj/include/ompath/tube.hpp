#pragma once

#include "ompath/holder.hpp"
#include "ompath/model.hpp"
#include "ompath/om.hpp"
#include "ompath/path.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ompath {

/// Monte Carlo estimate of P(||X - phi||_alpha <= epsilon) where X starts at
/// phi(0) and is simulated on phi's grid.
struct TubeQuery {
  SdeModel model;
  DiscretePath reference;
  double epsilon = 0.5;
  HolderParams holder;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

struct TubeEstimate {
  double probability = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
  double standard_error = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  /// Set when no sample landed in the tube.
  bool low_statistics = false;
};

TubeEstimate make_estimate(std::size_t hits, std::size_t samples, double epsilon, double alpha);

TubeEstimate tube_probability(const TubeQuery& query);

/// One estimate per radius from a single ensemble (common random numbers),
/// so hit counts are nested: a smaller radius never gains hits.
std::vector<TubeEstimate> tube_probability_ladder(const TubeQuery& query, std::span<const double> epsilons);

struct RatioOptions {
  double epsilon = 0.35;
  HolderParams holder;
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  /// Steps of the simulation grid. The reference paths may be finer as long as
  /// their step count is a multiple; the functional is evaluated on the
  /// reference grid and the tubes on the subsampled one. 0 means "same grid".
  std::size_t tube_steps = 0;
  OmScheme scheme = OmScheme::kMidpoint;
};

/// Compares two tubes around paths sharing a start point, using one ensemble
/// for both membership tests.
struct RatioCheck {
  TubeEstimate first;
  TubeEstimate second;
  std::size_t joint_hits = 0;
  double om_first = 0.0;
  double om_second = 0.0;
  /// log(P1 / P2); zero when inconclusive.
  double log_prob_ratio = 0.0;
  /// -(OM(phi1) - OM(phi2)) / 2.
  double om_prediction = 0.0;
  /// |log_prob_ratio - om_prediction|.
  double agreement = 0.0;
  /// Delta-method standard error of log_prob_ratio, including the
  /// covariance of the two indicators on the shared ensemble.
  double standard_error = 0.0;
  /// Either tube caught no sample; no ratio is reported.
  bool inconclusive = false;
};

RatioCheck om_ratio_check(const SdeModel& model, const DiscretePath& first, const DiscretePath& second,
                          const RatioOptions& options);

/// One RatioCheck per radius, all from the same ensemble.
std::vector<RatioCheck> om_ratio_ladder(const SdeModel& model, const DiscretePath& first,
                                        const DiscretePath& second, std::span<const double> epsilons,
                                        const RatioOptions& options);

}  // namespace ompath
