#include "phw/grid1d.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "phw/errors.hpp"

using namespace phw;

TEST_CASE("derivative operator: exact on constants and linears, "
          "second-order inside") {
  const Grid1D g = Grid1D::make(33, 0.0, 2.0);

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.n);
  CHECK((g.D * ones).lpNorm<Eigen::Infinity>() == 0.0);

  Eigen::VectorXd x(g.n), x2(g.n);
  for (int i = 0; i < g.n; ++i) {
    x(i) = g.node[i];
    x2(i) = g.node[i] * g.node[i];
  }
  CHECK(((g.D * x).array() - 1.0).abs().maxCoeff() < 1e-13);

  const Eigen::VectorXd dx2 = g.D * x2;
  for (int i = 1; i + 1 < g.n; ++i)
    CHECK(dx2(i) == doctest::Approx(2.0 * g.node[i]).epsilon(1e-12));
}

TEST_CASE("norm and derivative satisfy the pairing identity exactly") {
  for (int n : {3, 8, 33}) {
    const Grid1D g = Grid1D::make(n, -1.0, 3.0);
    Eigen::MatrixXd Wd = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) Wd(i, i) = g.quad(i);
    const Eigen::MatrixXd M =
        Wd * Eigen::MatrixXd(g.D) + Eigen::MatrixXd(g.D).transpose() * Wd;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    B(0, 0) = -1.0;
    B(n - 1, n - 1) = 1.0;
    CHECK((M - B).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("discrete divergence theorem holds to roundoff for random data") {
  std::mt19937 gen(912837);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int n : {16, 64, 256}) {
    const Grid1D g = Grid1D::make(n, 0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd f(n);
      for (int i = 0; i < n; ++i) f(i) = dist(gen);
      const double scale = f.lpNorm<Eigen::Infinity>();
      CHECK(stokes_defect(g, f) <= 1e-13 * scale * n);
    }
  }
}

TEST_CASE("quadrature converges at second order") {
  auto integrate_x3 = [](int n) {
    const Grid1D g = Grid1D::make(n, 0.0, 1.0);
    Eigen::VectorXd f(n);
    for (int i = 0; i < g.n; ++i) f(i) = std::pow(g.node[i], 3);
    return std::abs(g.integrate(f) - 0.25);
  };
  const double coarse = integrate_x3(11);
  const double fine = integrate_x3(21);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("the W-adjoint mirrors integration by parts for random pairs") {
  std::mt19937 gen(5551);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const Grid1D g = Grid1D::make(40, 0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd u(g.n), v(g.n);
    for (int i = 0; i < g.n; ++i) {
      u(i) = dist(gen);
      v(i) = dist(gen);
    }
    // Moving the derivative across the W pairing leaves exactly the
    // boundary evaluations behind.
    const double lhs = (g.quad.array() * u.array() * (g.D * v).array()).sum();
    const double moved =
        (g.quad.array() * (g.D * u).array() * v.array()).sum();
    const double bnd = u(g.n - 1) * v(g.n - 1) - u(0) * v(0);
    CHECK(std::abs(lhs + moved - bnd) < 1e-13);

    // The W-adjoint equals -D plus the face corrections W^{-1} B.
    const Eigen::VectorXd gap = g.adjoint_apply(u) + g.D * u;
    for (int i = 1; i + 1 < g.n; ++i) CHECK(std::abs(gap(i)) < 1e-13);
    CHECK(std::abs(gap(0) + u(0) / g.quad(0)) < 1e-12);
    CHECK(std::abs(gap(g.n - 1) - u(g.n - 1) / g.quad(g.n - 1)) < 1e-12);
  }
}

TEST_CASE("grid construction rejects degenerate requests") {
  CHECK_THROWS_AS(Grid1D::make(2, 0.0, 1.0), ShapeError);
  CHECK_THROWS_AS(Grid1D::make(10, 1.0, 1.0), ShapeError);
}
