#include "ompath/errors.hpp"
#include "ompath/holder.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ompath;

namespace {

Eigen::MatrixXd random_walk(std::size_t steps, Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0 / std::sqrt(static_cast<double>(steps)));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps) + 1, dim);
  for (Eigen::Index k = 1; k < v.rows(); ++k) {
    for (Eigen::Index c = 0; c < dim; ++c) v(k, c) = v(k - 1, c) + z(rng);
  }
  return v;
}

DiscretePath identity_path(std::size_t steps) {
  return DiscretePath::from_function(steps, 1, [](double t) { return Eigen::VectorXd::Constant(1, t); });
}

}  // namespace

TEST_SUITE("holder") {
  TEST_CASE("sup norm") {
    CHECK(sup_norm(DiscretePath(10, 2)) == 0.0);
    Eigen::MatrixXd v(3, 1);
    v << 0.0, 0.5, 1.0;
    CHECK(sup_norm(DiscretePath(v)) == 1.0);
    Eigen::MatrixXd w(3, 2);
    w << 0.0, 0.0, -1.0, 3.0, 0.5, -2.0;
    CHECK(sup_norm(DiscretePath(w)) == doctest::Approx(2.0));
  }

  TEST_CASE("seminorm of constant and linear paths") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(17, 2, 4.2);
    CHECK(holder_seminorm(DiscretePath(c), {0.2}) == 0.0);
    for (double alpha : {0.05, 0.2, 0.24, 0.7}) {
      for (std::size_t n : {1ul, 7ul, 100ul}) {
        CAPTURE(alpha);
        CAPTURE(n);
        CHECK(holder_seminorm(identity_path(n), {alpha}) == doctest::Approx(1.0).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("three-node tent") {
    Eigen::MatrixXd v(3, 1);
    v << 0.0, 1.0, 0.0;
    CHECK(holder_seminorm(DiscretePath(v), {0.25}) == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-14));
    CHECK(holder_seminorm_pairwise(v, 0.5, {0.25}) == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-14));
  }

  TEST_CASE("norm is sup plus seminorm") {
    CHECK(holder_norm(identity_path(64), {0.25}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(holder_norm(DiscretePath(8, 1), {0.25}) == 0.0);
  }

  TEST_CASE("absolute homogeneity and triangle inequality on random paths") {
    std::mt19937_64 rng(3);
    const HolderParams p{0.2};
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 8 + static_cast<std::size_t>(trial % 50);
      const Eigen::Index dim = 1 + trial % 3;
      const Eigen::MatrixXd x = random_walk(n, dim, rng);
      const Eigen::MatrixXd y = random_walk(n, dim, rng);
      const double h = 1.0 / static_cast<double>(n);
      const double nx = holder_norm(x, h, p);
      CHECK(holder_norm(3.0 * x, h, p) == doctest::Approx(3.0 * nx).epsilon(1e-12));
      CHECK(holder_norm(-x, h, p) == doctest::Approx(nx).epsilon(1e-12));
      CHECK(holder_norm(x + y, h, p) <= nx + holder_norm(y, h, p) + 1e-12);
    }
  }

  TEST_CASE("optimized scan equals the pairwise reference exactly") {
    std::mt19937_64 rng(17);
    for (std::size_t n : {1ul, 2ul, 33ul, 1000ul, kExactScanLimit, kExactScanLimit + 904}) {
      for (Eigen::Index dim : {1, 2}) {
        const Eigen::MatrixXd v = random_walk(n, dim, rng);
        const double h = 1.0 / static_cast<double>(n);
        for (double alpha : {0.1, 0.2}) {
          CAPTURE(n);
          CHECK(holder_seminorm(v, h, {alpha}) == holder_seminorm_pairwise(v, h, {alpha}));
        }
      }
    }
  }

  TEST_CASE("smooth paths above the exact-scan limit") {
    // Long lags dominate here, so pruning must not skip them.
    const std::size_t n = 2 * kExactScanLimit;
    const DiscretePath p = DiscretePath::from_function(n, 1, [](double t) {
      return Eigen::VectorXd::Constant(1, std::sin(6.0 * t));
    });
    CHECK(holder_seminorm(p, {0.2}) == holder_seminorm_pairwise(p.values(), p.step_size(), {0.2}));
  }

  TEST_CASE("subgrid seminorm never exceeds the full grid") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const DiscretePath p(random_walk(240, 1 + trial % 2, rng));
      const double full = holder_seminorm(p, {0.2});
      for (std::size_t stride : {2ul, 3ul, 8ul, 60ul}) CHECK(holder_seminorm(p.subsample(stride), {0.2}) <= full);
    }
  }

  TEST_CASE("early-exit membership agrees with the norm") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::MatrixXd v = 0.3 * random_walk(64, 1 + trial % 2, rng);
      const double norm = holder_norm(v, 1.0 / 64.0, {0.2});
      for (double r : {0.5 * norm, norm, std::nextafter(norm, 0.0), 1.5 * norm, 0.1, 0.35, 1.0}) {
        CHECK(within_holder_ball(v, 1.0 / 64.0, {0.2}, r) == (norm <= r));
      }
    }
  }

  TEST_CASE("alpha validation") {
    CHECK_THROWS_AS(HolderParams{0.0}.validate(), ContractError);
    CHECK_THROWS_AS(HolderParams{1.0}.validate(), ContractError);
    CHECK_NOTHROW(HolderParams{0.5}.validate());
    CHECK_FALSE(HolderParams{0.5}.in_small_ball_range());
    CHECK(HolderParams{0.2}.in_small_ball_range());
    CHECK_THROWS_AS(holder_seminorm(identity_path(4), {1.5}), ContractError);
  }
}
