#include "ompath/errors.hpp"
#include "ompath/model.hpp"

#include <doctest.h>

#include <random>

using namespace ompath;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("example1 drift by hand") {
    const SdeModel m = builtin_model("example1");
    CHECK(eval_drift(m, 0.5, vec({2.0}))[0] == doctest::Approx(0.0));
    CHECK(eval_drift(m, 1.0, vec({1.0}))[0] == doctest::Approx(3.0));
  }

  TEST_CASE("zero drift is zero everywhere") {
    const SdeModel m = builtin_model("zero_drift", {{"n", 3}});
    CHECK(eval_drift(m, 0.3, vec({1.0, -2.0, 5.0})).isZero(0.0));
    CHECK(eval_diffusion(m, 0.7).isIdentity(0.0));
  }

  TEST_CASE("dimension mismatch is a contract violation") {
    const SdeModel m = builtin_model("example1");
    CHECK_THROWS_AS(eval_drift(m, 0.5, vec({1.0, 2.0})), ContractError);
    CHECK_THROWS_AS(eval_drift_jacobian(m, 0.5, vec({1.0, 2.0})), ContractError);
  }

  TEST_CASE("example1 Jacobian by hand") {
    const SdeModel m = builtin_model("example1");
    CHECK(eval_drift_jacobian(m, 0.5, vec({2.0}))(0, 0) == doctest::Approx(-4.0));
  }

  TEST_CASE("linear drift has constant Jacobian, also via finite differences") {
    Matrix a(2, 2);
    a << -1.0, 0.5, 2.0, -3.0;
    SdeModel m;
    m.name = "linear";
    m.dimension = 2;
    m.drift = [a](double, const Vector& x) -> Vector { return a * x; };
    m.diffusion = [](double) -> Matrix { return Matrix::Identity(2, 2); };
    for (const Vector& x : {vec({0.0, 0.0}), vec({1.0, -2.0}), vec({30.0, 7.0})}) {
      CHECK((eval_drift_jacobian(m, 0.4, x) - a).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("example2 Jacobian at (2, 2) with a = b = 1") {
    const SdeModel m = builtin_model("example2", {{"a", 1}, {"b", 1}});
    const Matrix j = eval_drift_jacobian(m, 0.0, vec({2.0, 2.0}));
    Matrix expected(2, 2);
    expected << -0.48, -0.16, -0.16, -0.48;
    CHECK((j - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((fd_drift_jacobian(m, 0.0, vec({2.0, 2.0})) - expected).cwiseAbs().maxCoeff() < 1e-8);
    // The metastable states are equilibria.
    CHECK(eval_drift(m, 0.3, vec({2.0, 2.0})).isZero(1e-15));
    CHECK(eval_drift(m, 0.3, vec({-2.0, -2.0})).isZero(1e-15));
  }

  TEST_CASE("builtin diffusions") {
    const SdeModel e1 = builtin_model("example1");
    CHECK(eval_diffusion(e1, 0.0)(0, 0) == 1.0);
    CHECK(eval_diffusion(e1, 1.0)(0, 0) == 2.0);
    const SdeModel e2 = builtin_model("example2", {{"a", 1}, {"b", 1}});
    Matrix g0(2, 2);
    g0 << 0.4, 0.0, 0.0, 0.8;
    CHECK((eval_diffusion(e2, 0.0) - g0).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("builtin_model rejects bad input") {
    CHECK_THROWS_AS(builtin_model("example3"), ContractError);
    CHECK_THROWS_AS(builtin_model("example2", {{"a", 1}}), ContractError);
    CHECK_THROWS_AS(builtin_model("example2", {{"a", 0}, {"b", 1}}), ContractError);
    CHECK_THROWS_AS(builtin_model("example2", {{"a", 1}, {"b", -2}}), ContractError);
    CHECK_THROWS_AS(builtin_model("example1", {{"a", 1}}), ContractError);
    CHECK_THROWS_AS(builtin_model("zero_drift", {{"n", 0}}), ContractError);
  }

  TEST_CASE("analytic Jacobians agree with finite differences at 100 probes") {
    std::vector<SdeModel> models = {builtin_model("example1"),
                                    builtin_model("example2", {{"a", 1}, {"b", 1}}),
                                    builtin_model("example2", {{"a", 10}, {"b", 1}}),
                                    builtin_model("example2", {{"a", 30}, {"b", 1}}),
                                    builtin_model("linear_test", {{"n", 3}, {"a", -2}}),
                                    builtin_model("zero_drift", {{"n", 2}})};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> time(0.0, 1.0);
    std::uniform_real_distribution<double> state(-3.0, 3.0);
    for (const auto& m : models) {
      CAPTURE(m.name);
      for (int p = 0; p < 100; ++p) {
        const double t = time(rng);
        Vector x(m.dimension);
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = state(rng);
        const Matrix j = eval_drift_jacobian(m, t, x);
        const Matrix fd = fd_drift_jacobian(m, t, x);
        CHECK((j - fd).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, j.cwiseAbs().maxCoeff()));

        // Gradient of the trace, analytic against differences of the trace.
        const Vector dg = eval_divergence_gradient(m, t, x);
        for (Eigen::Index c = 0; c < x.size(); ++c) {
          Vector up = x, down = x;
          up[c] += 1e-5;
          down[c] -= 1e-5;
          const double fd_c = (eval_drift_jacobian(m, t, up).trace() - eval_drift_jacobian(m, t, down).trace()) / 2e-5;
          CHECK(std::abs(dg[c] - fd_c) <= 1e-5 * std::max(1.0, std::abs(dg[c])));
        }
      }
    }
  }

  TEST_CASE("example1 diffusion lies between 1 and 2") {
    const SdeModel m = builtin_model("example1");
    for (int k = 0; k <= 1000; ++k) {
      const double g = eval_diffusion(m, k / 1000.0)(0, 0);
      CHECK(g >= 1.0);
      CHECK(g <= 2.0);
    }
  }

  TEST_CASE("evaluation is pure") {
    const SdeModel m = builtin_model("example2", {{"a", 5}, {"b", 1}});
    const Vector x = vec({0.3, -1.7});
    const Vector first = eval_drift(m, 0.25, x);
    eval_drift(m, 0.9, vec({5.0, 5.0}));
    CHECK(eval_drift(m, 0.25, x) == first);
  }

  TEST_CASE("condition checks are advisory unless strict") {
    CHECK(check_conditions(builtin_model("example1")).ok());
    CHECK(check_conditions(builtin_model("example2", {{"a", 2}, {"b", 1}})).ok());

    const SdeModel degenerate = builtin_model("zero_drift", {{"sigma", 0}});
    const ConditionReport report = check_conditions(degenerate);
    CHECK_FALSE(report.ok());
    CHECK_THROWS_AS(check_conditions(degenerate, true), ContractError);

    SdeModel wrong = builtin_model("example1");
    wrong.drift_jacobian = [](double, const Vector&) -> Matrix { return Matrix::Constant(1, 1, 100.0); };
    CHECK_FALSE(check_conditions(wrong).ok());

    SdeModel bounded = builtin_model("example1");
    bounded.lipschitz_bound = 1.0;
    CHECK_FALSE(check_conditions(bounded).ok());
  }

  TEST_CASE("default endpoints are the metastable states") {
    const auto e1 = default_endpoints("example1");
    REQUIRE(e1);
    CHECK(e1->first[0] == -2.0);
    CHECK(e1->second[0] == 2.0);
    CHECK_FALSE(default_endpoints("zero_drift"));
  }
}
