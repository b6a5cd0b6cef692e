#include "doctest.h"

#include <cmath>
#include <numbers>

#include "pggan/physics.hpp"
#include "pggan/rng.hpp"

using namespace pggan;

namespace {

// Velocity integration under constant acceleration -g: exact per step for a
// piecewise-linear velocity, independent of the closed form.
Trajectory integrate(const Label& l, const PhysicsParams& p) {
  Trajectory out(2, p.n_steps);
  const double rad = l.phi_deg * std::numbers::pi / 180.0;
  Point x = p.x0;
  Point v(l.v0_mag * std::cos(rad), l.v0_mag * std::sin(rad));
  for (int k = 0; k < p.n_steps; ++k) {
    const Point v_next = v - p.g * p.dt;
    x += 0.5 * (v + v_next) * p.dt;
    v = v_next;
    out.col(k) = x;
  }
  return out;
}

Trajectory perturbed(const Label& l, const PhysicsParams& p, Rng& rng, double scale) {
  Trajectory t = exact_trajectory(l, p);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("exact_trajectory: rest under gravity and uniform motion") {
  const PhysicsParams p;
  const Trajectory rest = exact_trajectory({0.0, 0.0}, p);
  CHECK(rest(0, 0) == 0.0);
  CHECK(rest(1, 0) == doctest::Approx(-0.00049).epsilon(1e-12));

  PhysicsParams flat;
  flat.g = Point(0, 0);
  const Trajectory t = exact_trajectory({10.0, 0.0}, flat);
  for (int k = 1; k <= flat.n_steps; ++k) {
    CHECK(t(0, k - 1) == doctest::Approx(10.0 * k * flat.dt).epsilon(1e-14));
    CHECK(t(1, k - 1) == 0.0);
  }
}

TEST_CASE("exact_trajectory matches velocity integration") {
  const PhysicsParams p;
  const Label l{50.0, 45.0};
  const Trajectory a = exact_trajectory(l, p);
  const Trajectory b = integrate(l, p);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("label velocity uses degrees") {
  const Eigen::Vector2d v = Label{2.0, 90.0}.velocity();
  CHECK(std::abs(v.x()) < 1e-15);
  CHECK(v.y() == doctest::Approx(2.0));
}

TEST_CASE("params validation") {
  PhysicsParams p;
  p.dt = 0;
  CHECK_THROWS(p.validate());
  p.dt = 0.01;
  p.n_steps = 0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("pointwise_residual") {
  const PhysicsParams p;
  const Label l{30.0, 60.0};
  const Point x = exact_point(17, l, p);
  CHECK(pointwise_residual(x, 17, l, p) < 1e-12);
  CHECK(pointwise_residual(x + Point(1, 0), 17, l, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pointwise_residual(x + Point(0.3, -0.4), 17, l, p) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(pointwise_residual(x, 0, l, p), std::out_of_range);
  CHECK_THROWS_AS(pointwise_residual(x, p.n_steps + 1, l, p), std::out_of_range);
}

TEST_CASE("mean_residual") {
  const PhysicsParams p;
  const Label l{80.0, 10.0};
  Trajectory t = exact_trajectory(l, p);
  CHECK(mean_residual(t, l, p) < 1e-9);
  t.row(0).array() += 1.0;
  CHECK(mean_residual(t, l, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(mean_residual(Trajectory(2, 99), l, p));

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory r = perturbed(l, p, rng, 2.0);
    double sum = 0;
    for (int k = 1; k <= p.n_steps; ++k) sum += pointwise_residual(r.col(k - 1), k, l, p);
    CHECK(mean_residual(r, l, p) == doctest::Approx(sum / p.n_steps).epsilon(1e-14));
  }
}

TEST_CASE("mean_residual is quadratic in displacement") {
  const PhysicsParams p;
  const Label l{12.0, 33.0};
  Rng rng(8);
  const Trajectory exact = exact_trajectory(l, p);
  Trajectory d(2, p.n_steps);
  for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = rng.uniform(-1, 1);
  const double r1 = mean_residual(exact + d, l, p);
  const double r2 = mean_residual(exact + 2 * d, l, p);
  CHECK(r2 == doctest::Approx(4 * r1).epsilon(1e-10));
}

TEST_CASE("residual_gradient: exact, single displacement, finite differences") {
  const PhysicsParams p;
  const Label l{40.0, 70.0};
  Trajectory t = exact_trajectory(l, p);
  CHECK(residual_gradient(t, l, p).isZero(1e-12));

  t(0, 41) += 0.7;
  Eigen::VectorXd g = residual_gradient(t, l, p);
  CHECK(g[2 * 41] == doctest::Approx(2 * 0.7 / 100).epsilon(1e-10));
  g[2 * 41] = 0;
  CHECK(g.cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS(residual_gradient(Trajectory(2, 3), l, p));

  Rng rng(13);
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    Trajectory r = perturbed(l, p, rng, 3.0);
    const Eigen::VectorXd grad = residual_gradient(r, l, p);
    Eigen::VectorXd fd(grad.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double saved = r.data()[i];
      r.data()[i] = saved + h;
      const double up = mean_residual(r, l, p);
      r.data()[i] = saved - h;
      const double down = mean_residual(r, l, p);
      r.data()[i] = saved;
      fd[i] = (up - down) / (2 * h);
    }
    CHECK((grad - fd).norm() / grad.norm() < 1e-6);
  }
}

TEST_CASE("oracle views agree bitwise") {
  const ProjectileModel model;
  const BlackBoxOracle& black_box = model;
  const DifferentiableOracle& diff = model;
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Label l{rng.uniform(1, 100), rng.uniform(0, 90)};
    const Trajectory t = perturbed(l, model.params(), rng, 1.0);
    CHECK(black_box.mean_residual(t, l) == diff.mean_residual(t, l));
    CHECK(black_box.mean_residual(t, l) == mean_residual(t, l, model.params()));
    CHECK(diff.residual_gradient(t, l) == residual_gradient(t, l, model.params()));
  }
}
