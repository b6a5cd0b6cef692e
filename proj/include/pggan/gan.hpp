#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "pggan/data.hpp"
#include "pggan/mlp.hpp"
#include "pggan/physics.hpp"
#include "pggan/rng.hpp"

namespace pggan {

/// Scores are clamped into [kScoreMin, kScoreMax] before any logarithm.
inline constexpr double kScoreMin = 1e-7;
inline constexpr double kScoreMax = 1.0 - 1e-7;

double clamp_score(double s);

struct NetShape {
  int noise_dim = 16;
  int hidden_width = 128;
  int hidden_layers = 2;

  friend bool operator==(const NetShape&, const NetShape&) = default;
};

/// G(z | theta): input is [z; normalized label], output a normalized
/// flattened trajectory.
struct GeneratorNet {
  MlpSpec spec;
  MlpParams<double> params;
  int noise_dim = 0;

  static MlpSpec make_spec(const NetShape& shape, int traj_dim);
  static GeneratorNet create(const NetShape& shape, int traj_dim, Rng& rng);
  int traj_dim() const { return spec.output_width(); }
};

/// D(x | theta): input is [normalized trajectory; normalized label], output a
/// sigmoid score.
struct DiscriminatorNet {
  MlpSpec spec;
  MlpParams<double> params;

  static MlpSpec make_spec(const NetShape& shape, int traj_dim);
  static DiscriminatorNet create(const NetShape& shape, int traj_dim, Rng& rng);
  int traj_dim() const { return spec.input_width() - 2; }
};

/// Batched generation; columns of z and labels_norm are samples.
MlpTape<double> generate(const GeneratorNet& gen, const Eigen::Ref<const Eigen::MatrixXd>& z,
                         const Eigen::Ref<const Eigen::MatrixXd>& labels_norm);

/// Batched scoring. tape.output holds the raw sigmoid scores (1 x B); use
/// clamp_score before taking logs.
MlpTape<double> discriminate(const DiscriminatorNet& disc, const Eigen::Ref<const Eigen::MatrixXd>& traj_norm,
                             const Eigen::Ref<const Eigen::MatrixXd>& labels_norm);

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;  // d loss / d score, one entry per score
};

struct DiscLossGan {
  double loss = 0.0;
  Eigen::VectorXd real_grad;
  Eigen::VectorXd fake_grad;
};

/// -[mean log D(x) + mean log(1 - D(G(z)))]
DiscLossGan disc_loss_gan(std::span<const double> real_scores, std::span<const double> fake_scores);

/// mean log(1 - D(G(z))), minimized directly (saturating form).
LossGrad gen_loss_gan(std::span<const double> fake_scores);
/// -mean log D(G(z)); opt-in alternative to gen_loss_gan.
LossGrad gen_loss_gan_nonsaturating(std::span<const double> fake_scores);

/// Split of a generated batch by physics residual: real_like holds indices
/// with residual <= eps, fake_like the rest. Both are ascending.
struct Partition {
  std::vector<std::size_t> real_like;
  std::vector<std::size_t> fake_like;

  std::size_t size() const { return real_like.size() + fake_like.size(); }
};

Partition partition_residuals(std::span<const double> residuals, double eps);
Partition partition_by_residual(std::span<const Trajectory> trajs, std::span<const Label> labels, double eps,
                                const BlackBoxOracle& oracle);

/// -[mean over real_like log s + mean over fake_like log(1 - s)]; a term over
/// an empty index set contributes zero.
LossGrad disc_loss_pg(std::span<const double> scores, const Partition& part);

/// mean over fake_like of log(1 - s); real_like slots get zero gradient.
LossGrad gen_loss_pg(std::span<const double> scores, const Partition& part);
LossGrad gen_loss_pg_nonsaturating(std::span<const double> scores, const Partition& part);

struct PiWeight {
  double lambda = 0.1;
};

struct PiPenalty {
  double value = 0.0;
  Eigen::VectorXd grad;  // with respect to the normalized trajectory
};

/// lambda * r evaluated on the denormalized trajectory, with its gradient
/// chained back through denormalization.
PiPenalty pi_penalty(const Eigen::Ref<const Eigen::VectorXd>& traj_norm, const Label& label,
                     const Normalizer& normalizer, PiWeight weight, const DifferentiableOracle& oracle);

struct EpsilonBand {
  long epoch_start = 0;
  double epsilon = 0.0;

  friend bool operator==(const EpsilonBand&, const EpsilonBand&) = default;
};

/// Piecewise-constant threshold. Bands have strictly increasing starts and
/// non-increasing positive epsilons; the last band holds the target value.
class EpsilonSchedule {
 public:
  EpsilonSchedule() = default;
  explicit EpsilonSchedule(std::vector<EpsilonBand> bands);

  /// 5 / 2.5 / 1.25 / 0.625 starting at epochs 10k / 20k / 30k / 70k.
  static EpsilonSchedule reference();

  const std::vector<EpsilonBand>& bands() const { return bands_; }
  double target() const { return bands_.back().epsilon; }
  long first_epoch() const { return bands_.front().epoch_start; }
  double at(long epoch) const;
  EpsilonSchedule scaled(double factor) const;

  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;

 private:
  std::vector<EpsilonBand> bands_;
};

double epsilon_schedule(long epoch, const EpsilonSchedule& sched);

}  // namespace pggan
