#include "ompath/errors.hpp"
#include "ompath/om.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ompath;

namespace {

SdeModel constant_model(const Matrix& jac, const Matrix& g) {
  SdeModel m;
  m.name = "constant";
  m.dimension = jac.rows();
  m.drift = [jac](double, const Vector& x) -> Vector { return jac * x; };
  m.diffusion = [g](double) -> Matrix { return g; };
  m.drift_jacobian = [jac](double, const Vector&) -> Matrix { return jac; };
  return m;
}

Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  return Eigen::HouseholderQR<Matrix>(a).householderQ();
}

// Integrand of example2 written out term by term.
double example2_expanded(double a, double b, double t, double y1, double y2, double v1, double v2) {
  const double r1 = v1 + 0.04 * a * a * y1 * (y1 * y1 + y1 * y2 - 8.0);
  const double r2 = v2 + 0.04 * b * b * y2 * (y2 * y2 + y1 * y2 - 8.0);
  return 6.25 / std::pow(a * (t + 1.0), 2) * r1 * r1 + 6.25 / std::pow(b * (t + 2.0), 2) * r2 * r2 -
         0.04 * (3 * a * a * y1 * y1 + 3 * b * b * y2 * y2 + 2 * (a * a + b * b) * y1 * y2 - 8 * (a * a + b * b));
}

DiscretePath random_smooth_path(std::size_t steps, Eigen::Index dim, const Vector& start, const Vector& end,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Matrix modes(4, dim);
  for (Eigen::Index i = 0; i < modes.size(); ++i) modes.data()[i] = coef(rng);
  return DiscretePath::from_function(steps, dim, [&](double t) -> Vector {
    Vector v = (1.0 - t) * start + t * end;
    for (Eigen::Index m = 0; m < 4; ++m) v += std::sin((m + 1) * std::numbers::pi * t) * modes.row(m).transpose();
    return v;
  });
}

double observed_order(const SdeModel& model, const std::function<Vector(double)>& fn, Eigen::Index dim,
                      OmScheme scheme) {
  std::vector<double> values;
  for (std::size_t n : {125ul, 250ul, 500ul, 1000ul, 2000ul}) {
    values.push_back(om_functional(model, DiscretePath::from_function(n, dim, fn), scheme).total);
  }
  // Least-squares slope of log|OM_N - OM_2N| against log N.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    lx.push_back(std::log(125.0 * std::pow(2.0, static_cast<double>(i))));
    ly.push_back(std::log(std::abs(values[i] - values[i + 1])));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return -sxy / sxx;
}

}  // namespace

TEST_SUITE("om") {
  TEST_CASE("mat_inverse") {
    CHECK(mat_inverse(Matrix::Identity(3, 3)).isIdentity(0.0));
    Matrix d = Matrix::Zero(2, 2);
    d.diagonal() << 2.0, 4.0;
    Matrix d_inv = Matrix::Zero(2, 2);
    d_inv.diagonal() << 0.5, 0.25;
    CHECK((mat_inverse(d) - d_inv).cwiseAbs().maxCoeff() < 1e-15);
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    Matrix expected(2, 2);
    expected << -2, 1, 1.5, -0.5;
    CHECK((mat_inverse(m) - expected).cwiseAbs().maxCoeff() < 1e-14);

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix q = random_orthogonal(4, rng);
      const Matrix a = q * Vector::LinSpaced(4, 1.0, 1e4).asDiagonal() * random_orthogonal(4, rng);
      CHECK((a * mat_inverse(a) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("mat_inverse rejects singular and non-square input") {
    Matrix s(2, 2);
    s << 1, 2, 2, 4;
    try {
      mat_inverse(s);
      FAIL("expected singular matrix error");
    } catch (const SingularMatrixError& e) {
      CHECK(std::abs(e.determinant()) < 1e-12);
    }
    CHECK_THROWS_AS(mat_inverse(Matrix::Zero(2, 3)), ContractError);
  }

  TEST_CASE("divergence term examples") {
    const SdeModel e1 = builtin_model("example1");
    CHECK(divergence_term(e1, 1.0, Vector::Zero(1)) == doctest::Approx(4.0));
    CHECK(divergence_term(e1, 0.5, Vector::Constant(1, 2.0)) == doctest::Approx(-4.0));

    Matrix g(2, 2);
    g << 2, 1, 1, 1;
    CHECK(divergence_term(constant_model(Matrix::Identity(2, 2), g), 0.3, Vector::Zero(2)) == doctest::Approx(2.0));
    Matrix j(2, 2);
    j << 1, 2, 3, 4;
    CHECK(divergence_term(constant_model(j, g), 0.3, Vector::Zero(2)) == doctest::Approx(5.0));
  }

  TEST_CASE("literal and simplified divergence agree for 100 random pairs") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> log_cond(0.0, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = 1 + trial % 4;
      const Vector s = Vector::LinSpaced(n, 1.0, std::pow(10.0, log_cond(rng)));
      const Matrix g = random_orthogonal(n, rng) * s.asDiagonal() * random_orthogonal(n, rng);
      Matrix j(n, n);
      for (Eigen::Index i = 0; i < j.size(); ++i) j.data()[i] = z(rng);
      const SdeModel m = constant_model(j, g);
      CHECK(std::abs(divergence_term(m, 0.5, Vector::Zero(n)) - divergence_term_simplified(m, 0.5, Vector::Zero(n))) <
            1e-10);
    }
  }

  TEST_CASE("integrand examples") {
    CHECK(om_integrand(builtin_model("zero_drift"), 0.4, Vector::Constant(1, 7.0), Vector::Ones(1)) == 1.0);
    const SdeModel e1 = builtin_model("example1");
    CHECK(om_integrand(e1, 0.0, Vector::Constant(1, -2.0), Vector::Zero(1)) == doctest::Approx(0.0));
    CHECK(om_integrand(e1, 1.0, Vector::Constant(1, -2.0), Vector::Zero(1)) == doctest::Approx(-8.0));
  }

  TEST_CASE("constant path in example1 integrates to -4") {
    const SdeModel e1 = builtin_model("example1");
    const DiscretePath p = DiscretePath::linear(Vector::Constant(1, -2.0), Vector::Constant(1, -2.0), 1000);
    for (OmScheme scheme : {OmScheme::kMidpoint, OmScheme::kNodalTrapezoid}) {
      const OmEvaluation om = om_functional(e1, p, scheme);
      CHECK(std::abs(om.total + 4.0) < 1e-6);
      CHECK(om.drift_term == 0.0);
      CHECK(om.divergence_term == doctest::Approx(-4.0));
      CHECK(om.grid_size == 1000);
    }
  }

  TEST_CASE("unit-speed path with zero drift") {
    const DiscretePath p = DiscretePath::linear(Vector::Zero(1), Vector::Ones(1), 50);
    for (OmScheme scheme : {OmScheme::kMidpoint, OmScheme::kNodalTrapezoid}) {
      CHECK(om_functional(builtin_model("zero_drift"), p, scheme).total == doctest::Approx(1.0).epsilon(1e-13));
    }
  }

  TEST_CASE("example2 matches the expanded integrand") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-3.0, 3.0), t01(0.0, 1.0);
    for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{5.0, 1.0}, std::pair{2.0, 3.0}}) {
      const SdeModel m = builtin_model("example2", {{"a", a}, {"b", b}});
      for (int k = 0; k < 200; ++k) {
        const double t = t01(rng);
        Vector y(2), v(2);
        y << u(rng), u(rng);
        v << 5 * u(rng), 5 * u(rng);
        const double expected = example2_expanded(a, b, t, y[0], y[1], v[0], v[1]);
        CHECK(std::abs(om_integrand(m, t, y, v) - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
      }

      // Whole functional against an independent midpoint sum of the expanded form.
      const DiscretePath p = random_smooth_path(300, 2, Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), rng);
      const double h = p.step_size();
      double sum = 0.0;
      for (std::size_t k = 0; k < p.steps(); ++k) {
        const Vector mid = 0.5 * (p.node(k) + p.node(k + 1));
        const Vector vel = (p.node(k + 1) - p.node(k)) / h;
        sum += h * example2_expanded(a, b, (k + 0.5) * h, mid[0], mid[1], vel[0], vel[1]);
      }
      const double total = om_functional(m, p).total;
      CHECK(std::abs(total - sum) <= 1e-10 * std::max(1.0, std::abs(sum)));
    }
  }

  TEST_CASE("gradient matches central differences of the functional") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z;
    const std::vector<SdeModel> models = {builtin_model("example1"), builtin_model("example2", {{"a", 2}, {"b", 1}})};
    for (const auto& m : models) {
      const auto [x0, x1] = *default_endpoints(m.name);
      for (OmScheme scheme : {OmScheme::kMidpoint, OmScheme::kNodalTrapezoid}) {
        for (int trial = 0; trial < 20; ++trial) {
          const DiscretePath p = random_smooth_path(60, m.dimension, x0, x1, rng);
          const Eigen::MatrixXd grad = om_path_gradient(m, p, scheme);
          REQUIRE(grad.rows() == 59);
          Eigen::MatrixXd d(grad.rows(), grad.cols());
          for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = z(rng);
          DiscretePath up = p, down = p;
          up.values().middleRows(1, grad.rows()) += 1e-6 * d;
          down.values().middleRows(1, grad.rows()) -= 1e-6 * d;
          const double fd = (om_functional(m, up, scheme).total - om_functional(m, down, scheme).total) / 2e-6;
          const double exact = (grad.array() * d.array()).sum();
          CAPTURE(m.name);
          CHECK(std::abs(fd - exact) <= 1e-4 * std::max(1.0, std::abs(exact)));
        }
      }
    }
  }

  TEST_CASE("flat landscape has zero gradient") {
    const DiscretePath p(Eigen::MatrixXd::Constant(41, 2, 0.7));
    CHECK(om_path_gradient(builtin_model("zero_drift", {{"n", 2}}), p).isZero(0.0));
  }

  TEST_CASE("block-diagonal model decouples into 1-D functionals") {
    const SdeModel first = builtin_model("example1");
    const SdeModel second = builtin_model("linear_test", {{"a", -1.5}, {"g_slope", 0.5}});
    SdeModel joint;
    joint.name = "joint";
    joint.dimension = 2;
    joint.drift = [&](double t, const Vector& x) -> Vector {
      Vector f(2);
      f << eval_drift(first, t, x.head(1))[0], eval_drift(second, t, x.tail(1))[0];
      return f;
    };
    joint.diffusion = [&](double t) -> Matrix {
      Matrix g = Matrix::Zero(2, 2);
      g(0, 0) = eval_diffusion(first, t)(0, 0);
      g(1, 1) = eval_diffusion(second, t)(0, 0);
      return g;
    };
    joint.drift_jacobian = [&](double t, const Vector& x) -> Matrix {
      Matrix j = Matrix::Zero(2, 2);
      j(0, 0) = eval_drift_jacobian(first, t, x.head(1))(0, 0);
      j(1, 1) = eval_drift_jacobian(second, t, x.tail(1))(0, 0);
      return j;
    };

    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      const DiscretePath p = random_smooth_path(100, 2, Vector::Constant(2, -1.0), Vector::Constant(2, 1.5), rng);
      const DiscretePath p1(Eigen::MatrixXd(p.values().col(0)));
      const DiscretePath p2(Eigen::MatrixXd(p.values().col(1)));
      for (OmScheme scheme : {OmScheme::kMidpoint, OmScheme::kNodalTrapezoid}) {
        const double whole = om_functional(joint, p, scheme).total;
        const double parts = om_functional(first, p1, scheme).total + om_functional(second, p2, scheme).total;
        CHECK(std::abs(whole - parts) <= 1e-10 * std::max(1.0, std::abs(parts)));
      }
    }
  }

  TEST_CASE("quadrature converges at second order") {
    const auto smooth = [](double t) { return Vector::Constant(1, -2.0 + 4.0 * t + 0.3 * std::sin(std::numbers::pi * t)); };
    const SdeModel e1 = builtin_model("example1");
    for (OmScheme scheme : {OmScheme::kMidpoint, OmScheme::kNodalTrapezoid}) {
      const double order = observed_order(e1, smooth, 1, scheme);
      CAPTURE(order);
      CHECK(order >= 1.8);
    }
    const SdeModel e2 = builtin_model("example2", {{"a", 2}, {"b", 1}});
    const auto smooth2 = [](double t) {
      Vector v(2);
      v << -2.0 + 4.0 * t, -2.0 + 4.0 * t * t;
      return v;
    };
    CHECK(observed_order(e2, smooth2, 2, OmScheme::kMidpoint) >= 1.8);
  }

  TEST_CASE("summands are consistent") {
    std::mt19937_64 rng(51);
    const SdeModel e2 = builtin_model("example2", {{"a", 3}, {"b", 1}});
    for (int trial = 0; trial < 20; ++trial) {
      const DiscretePath p = random_smooth_path(80, 2, Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), rng);
      for (OmScheme scheme : {OmScheme::kMidpoint, OmScheme::kNodalTrapezoid}) {
        const OmEvaluation om = om_functional(e2, p, scheme);
        CHECK(om.drift_term >= 0.0);
        CHECK(std::abs(om.total - (om.drift_term + om.divergence_term)) <= 1e-12 * std::max(1.0, std::abs(om.total)));
      }
    }
  }

  TEST_CASE("singular diffusion and non-finite paths are reported") {
    const DiscretePath p = DiscretePath::linear(Vector::Zero(1), Vector::Ones(1), 10);
    CHECK_THROWS_AS(om_functional(builtin_model("zero_drift", {{"sigma", 0}}), p), SingularMatrixError);
    DiscretePath bad = p;
    bad.values()(3, 0) = std::nan("");
    CHECK_THROWS_AS(om_functional(builtin_model("example1"), bad), NumericalError);
    CHECK_THROWS_AS(om_functional(builtin_model("example2", {{"a", 1}, {"b", 1}}), p), ContractError);
  }
}
