#pragma once

#include "ompath/model.hpp"
#include "ompath/path.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace ompath {

struct SimulationSpec {
  SdeModel model;
  Vector x0;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  std::size_t samples = 1;
};

/// Any state component above this magnitude aborts the sample.
inline constexpr double kDivergenceBound = 1e6;

/// Seed of the independent RNG stream owned by sample `index`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Worker count for ensembles: OMPATH_THREADS if set, else hardware concurrency.
unsigned worker_count();

/// Standard Brownian increments, one row per step, each ~ Normal(0, h I).
Eigen::MatrixXd brownian_increments(Eigen::Index dimension, std::size_t steps, std::uint64_t seed,
                                    std::uint64_t stream);

/// Euler-Maruyama driven by the given increments (Ito: g at the left endpoint).
DiscretePath euler_maruyama_driven(const SdeModel& model, const Vector& x0,
                                   const Eigen::MatrixXd& increments);

/// Single path from stream 0 of the spec's seed; spec.samples is ignored.
DiscretePath euler_maruyama(const SimulationSpec& spec);

/// Path of sample `index`; identical to what simulate_ensemble produces for it.
DiscretePath simulate_sample(const SimulationSpec& spec, std::size_t index);

/// Runs `fn(index, path)` for every sample on up to `workers` threads and
/// returns the results in sample order. The first failure is rethrown.
template <typename Fn>
auto map_ensemble(const SimulationSpec& spec, Fn&& fn, unsigned workers = worker_count())
    -> std::vector<decltype(fn(std::size_t{}, std::declval<const DiscretePath&>()))> {
  using Result = decltype(fn(std::size_t{}, std::declval<const DiscretePath&>()));
  static_assert(!std::is_same_v<Result, bool>, "std::vector<bool> cannot be written concurrently");
  std::vector<Result> results(spec.samples);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(spec.samples)));

  std::exception_ptr failure;
  std::size_t failed_index = spec.samples;
  std::mutex failure_mutex;
  auto run = [&](unsigned worker) {
    for (std::size_t i = worker; i < spec.samples; i += workers) {
      try {
        results[i] = fn(i, simulate_sample(spec, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        // Keep the lowest failing index so the reported error is deterministic.
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// All sample paths, in sample order.
std::vector<DiscretePath> simulate_ensemble(const SimulationSpec& spec, unsigned workers = worker_count());

}  // namespace ompath
