#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

#include "pggan/physics.hpp"
#include "pggan/rng.hpp"

namespace pggan {

struct Record {
  Label label;
  Trajectory trajectory;
};

struct Dataset {
  std::vector<Record> records;
  PhysicsParams params;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// One exact trajectory per (v0, phi) pair, v0-major.
Dataset build_dataset(std::span<const double> v0_values, std::span<const double> phi_values,
                      const PhysicsParams& params);

/// Per-dimension standardization for flattened trajectories and labels.
struct Normalizer {
  static constexpr double kStdFloor = 1e-8;

  Eigen::VectorXd traj_mean, traj_std;
  Eigen::Vector2d label_mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d label_std = Eigen::Vector2d::Ones();

  Eigen::VectorXd normalize(const Trajectory& traj) const;
  Trajectory denormalize_trajectory(const Eigen::Ref<const Eigen::VectorXd>& flat) const;
  Eigen::Vector2d normalize(const Label& label) const;
  Label denormalize_label(const Eigen::Vector2d& v) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

Normalizer fit_normalizer(const Dataset& ds);

/// batch_size distinct record indices, uniform without replacement
/// (partial Fisher-Yates).
std::vector<std::size_t> sample_indices(std::size_t record_count, std::size_t batch_size, Rng& rng);
std::vector<Record> sample_batch(const Dataset& ds, std::size_t batch_size, Rng& rng);

/// CSV with header v0,phi,x1,y1,...,xN,yN; shortest round-trip doubles.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
Dataset read_dataset_csv(std::istream& in, const PhysicsParams& params);

/// Inclusive arithmetic range, e.g. range_values(0, 90, 10).
std::vector<double> range_values(double first, double last, double step);

}  // namespace pggan
