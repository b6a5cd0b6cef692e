#include "pggan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pggan {

double clamp_score(double s) { return std::clamp(s, kScoreMin, kScoreMax); }

namespace {

std::vector<int> widths(int in, const NetShape& shape, int out) {
  std::vector<int> w{in};
  for (int i = 0; i < shape.hidden_layers; ++i) w.push_back(shape.hidden_width);
  w.push_back(out);
  return w;
}

Eigen::MatrixXd stack(const Eigen::Ref<const Eigen::MatrixXd>& top, const Eigen::Ref<const Eigen::MatrixXd>& bottom,
                      const char* who) {
  if (top.cols() != bottom.cols())
    throw std::invalid_argument(std::string(who) + ": batch sizes differ (" + std::to_string(top.cols()) + " vs " +
                                std::to_string(bottom.cols()) + ")");
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

void require_nonempty(std::span<const double> s, const char* who) {
  if (s.empty()) throw std::invalid_argument(std::string(who) + ": empty score list");
}

void check_partition(std::span<const double> scores, const Partition& part, const char* who) {
  for (const auto* set : {&part.real_like, &part.fake_like})
    for (std::size_t i : *set)
      if (i >= scores.size())
        throw std::invalid_argument(std::string(who) + ": partition index " + std::to_string(i) +
                                    " out of range for " + std::to_string(scores.size()) + " scores");
}

}  // namespace

MlpSpec GeneratorNet::make_spec(const NetShape& shape, int traj_dim) {
  return MlpSpec{widths(shape.noise_dim + 2, shape, traj_dim), Activation::relu, Activation::identity};
}

GeneratorNet GeneratorNet::create(const NetShape& shape, int traj_dim, Rng& rng) {
  GeneratorNet g;
  g.spec = make_spec(shape, traj_dim);
  g.params = init_params(g.spec, rng);
  g.noise_dim = shape.noise_dim;
  return g;
}

MlpSpec DiscriminatorNet::make_spec(const NetShape& shape, int traj_dim) {
  return MlpSpec{widths(traj_dim + 2, shape, 1), Activation::relu, Activation::sigmoid};
}

DiscriminatorNet DiscriminatorNet::create(const NetShape& shape, int traj_dim, Rng& rng) {
  DiscriminatorNet d;
  d.spec = make_spec(shape, traj_dim);
  d.params = init_params(d.spec, rng);
  return d;
}

MlpTape<double> generate(const GeneratorNet& gen, const Eigen::Ref<const Eigen::MatrixXd>& z,
                         const Eigen::Ref<const Eigen::MatrixXd>& labels_norm) {
  if (z.rows() != gen.noise_dim)
    throw std::invalid_argument("generate: noise has " + std::to_string(z.rows()) + " rows, expected " +
                                std::to_string(gen.noise_dim));
  if (labels_norm.rows() != 2) throw std::invalid_argument("generate: labels must have 2 rows");
  return mlp_forward(gen.spec, gen.params, stack(z, labels_norm, "generate"));
}

MlpTape<double> discriminate(const DiscriminatorNet& disc, const Eigen::Ref<const Eigen::MatrixXd>& traj_norm,
                             const Eigen::Ref<const Eigen::MatrixXd>& labels_norm) {
  if (traj_norm.rows() != disc.traj_dim())
    throw std::invalid_argument("discriminate: trajectory has " + std::to_string(traj_norm.rows()) +
                                " rows, expected " + std::to_string(disc.traj_dim()));
  if (labels_norm.rows() != 2) throw std::invalid_argument("discriminate: labels must have 2 rows");
  return mlp_forward(disc.spec, disc.params, stack(traj_norm, labels_norm, "discriminate"));
}

DiscLossGan disc_loss_gan(std::span<const double> real_scores, std::span<const double> fake_scores) {
  require_nonempty(real_scores, "disc_loss_gan");
  require_nonempty(fake_scores, "disc_loss_gan");
  const auto nr = static_cast<double>(real_scores.size());
  const auto nf = static_cast<double>(fake_scores.size());
  DiscLossGan out;
  out.real_grad.resize(static_cast<Eigen::Index>(real_scores.size()));
  out.fake_grad.resize(static_cast<Eigen::Index>(fake_scores.size()));
  double real_term = 0.0, fake_term = 0.0;
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    const double s = clamp_score(real_scores[i]);
    real_term += std::log(s);
    out.real_grad[static_cast<Eigen::Index>(i)] = -1.0 / (nr * s);
  }
  for (std::size_t i = 0; i < fake_scores.size(); ++i) {
    const double s = clamp_score(fake_scores[i]);
    fake_term += std::log(1.0 - s);
    out.fake_grad[static_cast<Eigen::Index>(i)] = 1.0 / (nf * (1.0 - s));
  }
  out.loss = -(real_term / nr + fake_term / nf);
  return out;
}

LossGrad gen_loss_gan(std::span<const double> fake_scores) {
  require_nonempty(fake_scores, "gen_loss_gan");
  const auto n = static_cast<double>(fake_scores.size());
  LossGrad out{0.0, Eigen::VectorXd(static_cast<Eigen::Index>(fake_scores.size()))};
  double sum = 0.0;
  for (std::size_t i = 0; i < fake_scores.size(); ++i) {
    const double s = clamp_score(fake_scores[i]);
    sum += std::log(1.0 - s);
    out.grad[static_cast<Eigen::Index>(i)] = -1.0 / (n * (1.0 - s));
  }
  out.loss = sum / n;
  return out;
}

LossGrad gen_loss_gan_nonsaturating(std::span<const double> fake_scores) {
  require_nonempty(fake_scores, "gen_loss_gan_nonsaturating");
  const auto n = static_cast<double>(fake_scores.size());
  LossGrad out{0.0, Eigen::VectorXd(static_cast<Eigen::Index>(fake_scores.size()))};
  double sum = 0.0;
  for (std::size_t i = 0; i < fake_scores.size(); ++i) {
    const double s = clamp_score(fake_scores[i]);
    sum += std::log(s);
    out.grad[static_cast<Eigen::Index>(i)] = -1.0 / (n * s);
  }
  out.loss = -sum / n;
  return out;
}

Partition partition_residuals(std::span<const double> residuals, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("partition_by_residual: eps must be positive");
  Partition part;
  for (std::size_t i = 0; i < residuals.size(); ++i) (residuals[i] <= eps ? part.real_like : part.fake_like).push_back(i);
  return part;
}

Partition partition_by_residual(std::span<const Trajectory> trajs, std::span<const Label> labels, double eps,
                                const BlackBoxOracle& oracle) {
  if (trajs.size() != labels.size())
    throw std::invalid_argument("partition_by_residual: " + std::to_string(trajs.size()) + " trajectories but " +
                                std::to_string(labels.size()) + " labels");
  std::vector<double> residuals(trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) residuals[i] = oracle.mean_residual(trajs[i], labels[i]);
  return partition_residuals(residuals, eps);
}

LossGrad disc_loss_pg(std::span<const double> scores, const Partition& part) {
  check_partition(scores, part, "disc_loss_pg");
  LossGrad out{0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scores.size()))};
  if (!part.real_like.empty()) {
    const auto n = static_cast<double>(part.real_like.size());
    double sum = 0.0;
    for (std::size_t i : part.real_like) {
      const double s = clamp_score(scores[i]);
      sum += std::log(s);
      out.grad[static_cast<Eigen::Index>(i)] = -1.0 / (n * s);
    }
    out.loss -= sum / n;
  }
  if (!part.fake_like.empty()) {
    const auto n = static_cast<double>(part.fake_like.size());
    double sum = 0.0;
    for (std::size_t i : part.fake_like) {
      const double s = clamp_score(scores[i]);
      sum += std::log(1.0 - s);
      out.grad[static_cast<Eigen::Index>(i)] = 1.0 / (n * (1.0 - s));
    }
    out.loss -= sum / n;
  }
  return out;
}

LossGrad gen_loss_pg(std::span<const double> scores, const Partition& part) {
  check_partition(scores, part, "gen_loss_pg");
  LossGrad out{0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scores.size()))};
  if (part.fake_like.empty()) return out;
  const auto n = static_cast<double>(part.fake_like.size());
  double sum = 0.0;
  for (std::size_t i : part.fake_like) {
    const double s = clamp_score(scores[i]);
    sum += std::log(1.0 - s);
    out.grad[static_cast<Eigen::Index>(i)] = -1.0 / (n * (1.0 - s));
  }
  out.loss = sum / n;
  return out;
}

LossGrad gen_loss_pg_nonsaturating(std::span<const double> scores, const Partition& part) {
  check_partition(scores, part, "gen_loss_pg_nonsaturating");
  LossGrad out{0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scores.size()))};
  if (part.fake_like.empty()) return out;
  const auto n = static_cast<double>(part.fake_like.size());
  double sum = 0.0;
  for (std::size_t i : part.fake_like) {
    const double s = clamp_score(scores[i]);
    sum += std::log(s);
    out.grad[static_cast<Eigen::Index>(i)] = -1.0 / (n * s);
  }
  out.loss = -sum / n;
  return out;
}

PiPenalty pi_penalty(const Eigen::Ref<const Eigen::VectorXd>& traj_norm, const Label& label,
                     const Normalizer& normalizer, PiWeight weight, const DifferentiableOracle& oracle) {
  if (weight.lambda < 0) throw std::invalid_argument("pi_penalty: lambda must be non-negative");
  if (traj_norm.size() != oracle.params().flat_size())
    throw std::invalid_argument("pi_penalty: trajectory has " + std::to_string(traj_norm.size()) +
                                " coordinates, expected " + std::to_string(oracle.params().flat_size()));
  const Trajectory phys = normalizer.denormalize_trajectory(traj_norm);
  PiPenalty out;
  out.value = weight.lambda * oracle.mean_residual(phys, label);
  out.grad = weight.lambda * (oracle.residual_gradient(phys, label).array() * normalizer.traj_std.array()).matrix();
  return out;
}

EpsilonSchedule::EpsilonSchedule(std::vector<EpsilonBand> bands) : bands_(std::move(bands)) {
  if (bands_.empty()) throw std::invalid_argument("EpsilonSchedule: no bands");
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    if (!(bands_[i].epsilon > 0)) throw std::invalid_argument("EpsilonSchedule: epsilon must be positive");
    if (i > 0 && bands_[i].epoch_start <= bands_[i - 1].epoch_start)
      throw std::invalid_argument("EpsilonSchedule: band starts must be strictly increasing");
    if (i > 0 && bands_[i].epsilon > bands_[i - 1].epsilon)
      throw std::invalid_argument("EpsilonSchedule: epsilon must be non-increasing");
  }
}

EpsilonSchedule EpsilonSchedule::reference() {
  return EpsilonSchedule({{10'000, 5.0}, {20'000, 2.5}, {30'000, 1.25}, {70'000, 0.625}});
}

double EpsilonSchedule::at(long epoch) const {
  if (bands_.empty()) throw std::logic_error("EpsilonSchedule::at: empty schedule");
  if (epoch < bands_.front().epoch_start)
    throw std::out_of_range("epsilon_schedule: epoch " + std::to_string(epoch) + " precedes first band at " +
                            std::to_string(bands_.front().epoch_start));
  auto it = std::upper_bound(bands_.begin(), bands_.end(), epoch,
                             [](long e, const EpsilonBand& b) { return e < b.epoch_start; });
  return std::prev(it)->epsilon;
}

EpsilonSchedule EpsilonSchedule::scaled(double factor) const {
  if (!(factor > 0)) throw std::invalid_argument("EpsilonSchedule::scaled: factor must be positive");
  auto bands = bands_;
  for (auto& b : bands) b.epsilon *= factor;
  return EpsilonSchedule(std::move(bands));
}

double epsilon_schedule(long epoch, const EpsilonSchedule& sched) { return sched.at(epoch); }

}  // namespace pggan
