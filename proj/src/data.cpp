#include "pggan/data.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pggan/format.hpp"

namespace pggan {

namespace {

void require_distinct(std::span<const double> values, const char* name) {
  if (values.empty()) throw std::invalid_argument(std::string("build_dataset: ") + name + " list is empty");
  std::set<double> seen;
  for (double v : values)
    if (!seen.insert(v).second)
      throw std::invalid_argument(std::string("build_dataset: duplicate ") + name + " value " + format_double(v));
}

}  // namespace

Dataset build_dataset(std::span<const double> v0_values, std::span<const double> phi_values,
                      const PhysicsParams& params) {
  params.validate();
  require_distinct(v0_values, "v0");
  require_distinct(phi_values, "phi");
  Dataset ds;
  ds.params = params;
  ds.records.reserve(v0_values.size() * phi_values.size());
  for (double v0 : v0_values)
    for (double phi : phi_values) {
      const Label label{v0, phi};
      ds.records.push_back({label, exact_trajectory(label, params)});
    }
  return ds;
}

Normalizer fit_normalizer(const Dataset& ds) {
  if (ds.empty()) throw std::invalid_argument("fit_normalizer: empty dataset");
  const Eigen::Index dim = ds.records.front().trajectory.size();
  const auto n = static_cast<double>(ds.size());

  Eigen::MatrixXd traj(dim, ds.size());
  Eigen::Matrix2Xd labels(2, ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.records[i];
    if (r.trajectory.size() != dim) throw std::invalid_argument("fit_normalizer: ragged trajectories");
    traj.col(i) = r.trajectory.reshaped();
    labels.col(i) << r.label.v0_mag, r.label.phi_deg;
  }

  Normalizer norm;
  norm.traj_mean = traj.rowwise().sum() / n;
  norm.traj_std = ((traj.colwise() - norm.traj_mean).array().square().rowwise().sum() / n)
                      .sqrt()
                      .max(Normalizer::kStdFloor)
                      .matrix();
  norm.label_mean = labels.rowwise().sum() / n;
  norm.label_std = ((labels.colwise() - norm.label_mean).array().square().rowwise().sum() / n)
                       .sqrt()
                       .max(Normalizer::kStdFloor)
                       .matrix();
  return norm;
}

Eigen::VectorXd Normalizer::normalize(const Trajectory& traj) const {
  if (traj.size() != traj_mean.size())
    throw std::invalid_argument("Normalizer::normalize: trajectory has " + std::to_string(traj.size()) +
                                " coordinates, expected " + std::to_string(traj_mean.size()));
  return ((traj.reshaped() - traj_mean).array() / traj_std.array()).matrix();
}

Trajectory Normalizer::denormalize_trajectory(const Eigen::Ref<const Eigen::VectorXd>& flat) const {
  if (flat.size() != traj_mean.size() || flat.size() % 2 != 0)
    throw std::invalid_argument("Normalizer::denormalize_trajectory: dimension mismatch");
  const Eigen::VectorXd phys = (flat.array() * traj_std.array()).matrix() + traj_mean;
  return phys.reshaped(2, flat.size() / 2);
}

Eigen::Vector2d Normalizer::normalize(const Label& label) const {
  return ((Eigen::Vector2d(label.v0_mag, label.phi_deg) - label_mean).array() / label_std.array()).matrix();
}

Label Normalizer::denormalize_label(const Eigen::Vector2d& v) const {
  const Eigen::Vector2d phys = (v.array() * label_std.array()).matrix() + label_mean;
  return {phys[0], phys[1]};
}

std::vector<std::size_t> sample_indices(std::size_t record_count, std::size_t batch_size, Rng& rng) {
  if (batch_size > record_count)
    throw std::invalid_argument("sample_batch: batch size " + std::to_string(batch_size) + " exceeds " +
                                std::to_string(record_count) + " records");
  std::vector<std::size_t> pool(record_count);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(record_count - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(batch_size);
  return pool;
}

std::vector<Record> sample_batch(const Dataset& ds, std::size_t batch_size, Rng& rng) {
  std::vector<Record> batch;
  batch.reserve(batch_size);
  for (std::size_t i : sample_indices(ds.size(), batch_size, rng)) batch.push_back(ds.records[i]);
  return batch;
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << "v0,phi";
  for (int k = 1; k <= ds.params.n_steps; ++k) out << ",x" << k << ",y" << k;
  out << '\n';
  for (const auto& r : ds.records) {
    out << format_double(r.label.v0_mag) << ',' << format_double(r.label.phi_deg);
    for (Eigen::Index i = 0; i < r.trajectory.size(); ++i) out << ',' << format_double(r.trajectory.data()[i]);
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, const PhysicsParams& params) {
  params.validate();
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_dataset_csv: missing header");
  const std::size_t expected = 2 + static_cast<std::size_t>(params.flat_size());
  Dataset ds;
  ds.params = params;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != expected)
      throw std::invalid_argument("read_dataset_csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " + std::to_string(expected));
    Record r{{fields[0], fields[1]}, Trajectory(2, params.n_steps)};
    for (int i = 0; i < params.flat_size(); ++i) r.trajectory.data()[i] = fields[2 + i];
    ds.records.push_back(std::move(r));
  }
  return ds;
}

std::vector<double> range_values(double first, double last, double step) {
  if (!(step > 0)) throw std::invalid_argument("range_values: step must be positive");
  if (last < first) throw std::invalid_argument("range_values: last < first");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((last - first) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) out.push_back(first + static_cast<double>(i) * step);
  return out;
}

}  // namespace pggan
