#pragma once

// Closed-form projectile motion, x(t) = x0 - g t^2 / 2 + v0 t, and its squared
// residual. Trajectories store point k (t = k dt, k = 1..n_steps) in column
// k-1, so the column-major storage is already the flattened x1,y1,x2,y2,...
// layout the networks consume.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pggan {

using Point = Eigen::Vector2d;
using Trajectory = Eigen::Matrix2Xd;

struct PhysicsParams {
  Point x0 = Point(0.0, 0.0);
  Point g = Point(0.0, 9.8);
  double dt = 0.01;
  int n_steps = 100;

  void validate() const {
    if (!(dt > 0)) throw std::invalid_argument("PhysicsParams: dt must be positive");
    if (n_steps < 1) throw std::invalid_argument("PhysicsParams: n_steps must be >= 1");
  }

  int flat_size() const { return 2 * n_steps; }
  double time(int k) const { return k * dt; }

  friend bool operator==(const PhysicsParams&, const PhysicsParams&) = default;
};

struct Label {
  double v0_mag = 0.0;
  double phi_deg = 0.0;

  Point velocity() const {
    const double phi = phi_deg * std::numbers::pi / 180.0;
    return v0_mag * Point(std::cos(phi), std::sin(phi));
  }

  friend bool operator==(const Label&, const Label&) = default;
};

inline Point exact_point(int k, const Label& label, const PhysicsParams& params) {
  const double t = params.time(k);
  return params.x0 - 0.5 * params.g * t * t + label.velocity() * t;
}

inline Trajectory exact_trajectory(const Label& label, const PhysicsParams& params) {
  params.validate();
  Trajectory traj(2, params.n_steps);
  for (int k = 1; k <= params.n_steps; ++k) traj.col(k - 1) = exact_point(k, label, params);
  return traj;
}

/// ||x - x0 + g t^2 / 2 - v0 t||^2 at t = k dt.
inline double pointwise_residual(const Point& x, int k, const Label& label, const PhysicsParams& params) {
  if (k < 1 || k > params.n_steps)
    throw std::out_of_range("pointwise_residual: step " + std::to_string(k) + " outside 1.." +
                            std::to_string(params.n_steps));
  return (x - exact_point(k, label, params)).squaredNorm();
}

namespace detail {
inline void check_length(const Trajectory& traj, const PhysicsParams& params, const char* who) {
  if (traj.cols() != params.n_steps)
    throw std::invalid_argument(std::string(who) + ": trajectory has " + std::to_string(traj.cols()) +
                                " points, expected " + std::to_string(params.n_steps));
}
}  // namespace detail

inline double mean_residual(const Trajectory& traj, const Label& label, const PhysicsParams& params) {
  detail::check_length(traj, params, "mean_residual");
  double sum = 0.0;
  for (int k = 1; k <= params.n_steps; ++k) sum += pointwise_residual(traj.col(k - 1), k, label, params);
  return sum / params.n_steps;
}

/// d(mean_residual)/d(traj), flattened in point order.
inline Eigen::VectorXd residual_gradient(const Trajectory& traj, const Label& label, const PhysicsParams& params) {
  detail::check_length(traj, params, "residual_gradient");
  Eigen::VectorXd grad(params.flat_size());
  const double scale = 2.0 / params.n_steps;
  for (int k = 1; k <= params.n_steps; ++k)
    grad.segment<2>(2 * (k - 1)) = scale * (traj.col(k - 1) - exact_point(k, label, params));
  return grad;
}

/// Residual evaluator with no derivative capability: the only view of the
/// physics a physics-guided regime receives.
class BlackBoxOracle {
 public:
  virtual ~BlackBoxOracle() = default;
  virtual double mean_residual(const Trajectory& traj, const Label& label) const = 0;
  virtual const PhysicsParams& params() const = 0;
};

/// Residual plus its gradient, as a physics-informed penalty requires.
class DifferentiableOracle : public BlackBoxOracle {
 public:
  virtual Eigen::VectorXd residual_gradient(const Trajectory& traj, const Label& label) const = 0;
};

class ProjectileModel final : public DifferentiableOracle {
 public:
  explicit ProjectileModel(PhysicsParams params = {}) : params_(params) { params_.validate(); }

  double mean_residual(const Trajectory& traj, const Label& label) const override {
    return pggan::mean_residual(traj, label, params_);
  }
  Eigen::VectorXd residual_gradient(const Trajectory& traj, const Label& label) const override {
    return pggan::residual_gradient(traj, label, params_);
  }
  const PhysicsParams& params() const override { return params_; }

 private:
  PhysicsParams params_;
};

}  // namespace pggan
