#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pggan/data.hpp"

using namespace pggan;

namespace {

Dataset grid(double v0_last, double phi_step) {
  const auto v0 = range_values(1, v0_last, 1);
  const auto phi = range_values(0, 90, phi_step);
  return build_dataset(v0, phi, PhysicsParams{});
}

}  // namespace

TEST_CASE("range_values") {
  CHECK(range_values(0, 90, 10).size() == 10);
  CHECK(range_values(1, 100, 1).size() == 100);
  CHECK(range_values(0, 90, 1).back() == 90.0);
  CHECK_THROWS(range_values(0, 1, 0));
  CHECK_THROWS(range_values(2, 1, 1));
}

TEST_CASE("build_dataset: counts, order and exactness") {
  const Dataset full = grid(100, 1);
  CHECK(full.size() == 9100);
  for (const auto& r : full.records) REQUIRE(mean_residual(r.trajectory, r.label, full.params) < 1e-9);

  const std::vector<double> five{5}, zero{0};
  const Dataset single = build_dataset(five, zero, PhysicsParams{});
  REQUIRE(single.size() == 1);
  const Trajectory& t = single.records[0].trajectory;
  CHECK(t.row(0).minCoeff() > 0);
  CHECK(t(0, 99) == doctest::Approx(5.0));

  const std::vector<double> v0{1, 2}, phi{0, 90};
  const Dataset four = build_dataset(v0, phi, PhysicsParams{});
  REQUIRE(four.size() == 4);
  CHECK(four.records[1].label.v0_mag == 1.0);
  CHECK(four.records[1].label.phi_deg == 90.0);
  for (const auto& r : four.records) CHECK(mean_residual(r.trajectory, r.label, four.params) < 1e-9);
}

TEST_CASE("build_dataset errors") {
  const std::vector<double> dup{1, 2, 1}, ok{0}, empty;
  CHECK_THROWS(build_dataset(dup, ok, PhysicsParams{}));
  CHECK_THROWS(build_dataset(ok, dup, PhysicsParams{}));
  CHECK_THROWS(build_dataset(empty, ok, PhysicsParams{}));
}

TEST_CASE("fit_normalizer: identical records floor the std; two records give the midpoint") {
  const std::vector<double> v{3}, phi{20};
  Dataset ds = build_dataset(v, phi, PhysicsParams{});
  ds.records.push_back(ds.records[0]);
  const Normalizer n = fit_normalizer(ds);
  CHECK((n.traj_std.array() == Normalizer::kStdFloor).all());
  CHECK((n.label_std.array() == Normalizer::kStdFloor).all());

  const std::vector<double> v2{3, 7};
  const Dataset two = build_dataset(v2, phi, PhysicsParams{});
  const Normalizer m = fit_normalizer(two);
  const Eigen::VectorXd a = two.records[0].trajectory.reshaped();
  const Eigen::VectorXd b = two.records[1].trajectory.reshaped();
  CHECK((m.traj_mean - 0.5 * (a + b)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.label_mean.x() == doctest::Approx(5.0));
  CHECK(m.label_std.x() == doctest::Approx(2.0));

  CHECK_THROWS(fit_normalizer(Dataset{}));
}

TEST_CASE("normalize: mean maps to zero, scalar example, round trips") {
  const Dataset ds = grid(100, 1);
  const Normalizer n = fit_normalizer(ds);
  CHECK((n.traj_std.array() >= Normalizer::kStdFloor).all());

  const Trajectory mean_traj = n.denormalize_trajectory(n.traj_mean * 0.0 + Eigen::VectorXd::Zero(n.traj_mean.size()));
  CHECK(n.normalize(mean_traj).cwiseAbs().maxCoeff() < 1e-9);

  for (const auto& r : ds.records) {
    const Trajectory back = n.denormalize_trajectory(n.normalize(r.trajectory));
    REQUIRE((back - r.trajectory).cwiseAbs().maxCoeff() < 1e-9);
    const Label lb = n.denormalize_label(n.normalize(r.label));
    REQUIRE(std::abs(lb.v0_mag - r.label.v0_mag) < 1e-9);
    REQUIRE(std::abs(lb.phi_deg - r.label.phi_deg) < 1e-9);
  }

  Normalizer s;
  s.traj_mean = Eigen::VectorXd::Zero(2);
  s.traj_std = Eigen::VectorXd::Constant(2, 2.0);
  Trajectory x(2, 1);
  x << 4, -2;
  CHECK(s.normalize(x) == Eigen::Vector2d(2, -1));
  CHECK_THROWS(s.normalize(Trajectory(2, 3)));
  CHECK_THROWS(s.denormalize_trajectory(Eigen::VectorXd::Zero(3)));

  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Trajectory r(2, 100);
    for (Eigen::Index k = 0; k < r.size(); ++k) r.data()[k] = rng.uniform(-50, 150);
    CHECK((n.denormalize_trajectory(n.normalize(r)) - r).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sample_batch") {
  const Dataset ds = grid(5, 30);
  Rng rng(1);
  const auto idx = sample_indices(ds.size(), ds.size(), rng);
  std::set<std::size_t> seen(idx.begin(), idx.end());
  CHECK(seen.size() == ds.size());
  CHECK(*seen.rbegin() == ds.size() - 1);

  Rng a(77), b(77);
  const auto ra = sample_batch(ds, 1, a);
  const auto rb = sample_batch(ds, 1, b);
  CHECK(ra[0].label.v0_mag == rb[0].label.v0_mag);
  CHECK(ra[0].label.phi_deg == rb[0].label.phi_deg);

  CHECK_THROWS(sample_batch(ds, ds.size() + 1, rng));

  const auto batch = sample_indices(20, 7, rng);
  CHECK(std::set<std::size_t>(batch.begin(), batch.end()).size() == 7);
}

TEST_CASE("sample_batch is uniform") {
  Rng rng(99);
  const int draws = 10000, n = 10;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) ++counts[sample_indices(n, 1, rng)[0]];
  const double expected = draws / double(n);
  const double sigma = std::sqrt(draws * (1.0 / n) * (1 - 1.0 / n));
  for (int c : counts) CHECK(std::abs(c - expected) < 5 * sigma);
}

TEST_CASE("dataset csv round trip") {
  const Dataset ds = grid(3, 45);
  std::stringstream ss;
  write_dataset_csv(ss, ds);
  const std::string text = ss.str();
  CHECK(text.rfind("v0,phi,x1,y1,x2,y2,", 0) == 0);
  CHECK(text.find("x100,y100\n") != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + static_cast<long>(ds.size()));

  const Dataset back = read_dataset_csv(ss, ds.params);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].label.v0_mag == ds.records[i].label.v0_mag);
    CHECK(back.records[i].trajectory == ds.records[i].trajectory);
  }

  std::istringstream bad("v0,phi,x1,y1\n1,2,3\n");
  PhysicsParams one;
  one.n_steps = 1;
  CHECK_THROWS(read_dataset_csv(bad, one));
}
