#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pggan/adam.hpp"
#include "pggan/data.hpp"
#include "pggan/gan.hpp"
#include "pggan/physics.hpp"
#include "pggan/rng.hpp"

namespace pggan {

enum class Regime { gan, pi_gan, pg_gan, pg_pi_gan };

inline constexpr Regime kAllRegimes[] = {Regime::gan, Regime::pi_gan, Regime::pg_gan, Regime::pg_pi_gan};

/// Config/CLI name: gan, pi_gan, pg_gan, pg_pi_gan.
std::string_view to_string(Regime r);
/// Table heading: GAN, PI-GAN, PG-GAN, PG-PI-GAN.
std::string_view display_name(Regime r);
Regime parse_regime(std::string_view name);

inline bool is_physics_guided(Regime r) { return r == Regime::pg_gan || r == Regime::pg_pi_gan; }
inline bool is_physics_informed(Regime r) { return r == Regime::pi_gan || r == Regime::pg_pi_gan; }

struct TrainConfig {
  Regime regime = Regime::gan;
  std::uint64_t seed = 1;
  long pretrain_epochs = 10'000;
  long total_epochs = 100'000;
  int batch_size = 128;
  EpsilonSchedule schedule = EpsilonSchedule::reference();
  double lambda = 0.1;
  AdamHyper adam;
  NetShape net;
  bool non_saturating = false;
  // Physics-guided discriminator steps also see the sampled dataset records
  // as members of the real set (their residual is zero). Off: the
  // discriminator sees generator outputs only.
  bool pg_dataset_in_real_set = false;
  PhysicsParams physics;
  std::vector<double> v0_values = range_values(1, 100, 1);
  std::vector<double> phi_values = range_values(0, 90, 1);
  int eval_labels = 500;
  int eval_samples_per_label = 1;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  GeneratorNet gen;
  DiscriminatorNet disc;
  AdamState<double> gen_opt;
  AdamState<double> disc_opt;
  Normalizer normalizer;
  long epoch = 0;
  Rng rng;
};

bool operator==(const Checkpoint& a, const Checkpoint& b);

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

struct HistoryRecord {
  long epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  std::optional<double> epsilon;
  std::optional<double> r_frac;

  friend bool operator==(const HistoryRecord&, const HistoryRecord&) = default;
};

using TrainHistory = std::vector<HistoryRecord>;

/// Header epoch,d_loss,g_loss,epsilon,r_frac; absent values are empty fields.
void write_history_csv(std::ostream& out, const TrainHistory& history);

/// The physics as seen by training. Physics-guided regimes only ever touch
/// `referee`; `differentiable` is needed only by physics-informed regimes.
struct Oracles {
  const BlackBoxOracle* referee = nullptr;
  const DifferentiableOracle* differentiable = nullptr;
};

Dataset make_dataset(const TrainConfig& cfg);

/// Freshly initialized networks and optimizers at epoch 0.
Checkpoint initial_checkpoint(const TrainConfig& cfg, const Dataset& ds);

/// Ordinary conditional-GAN training from initialization for
/// cfg.pretrain_epochs epochs.
Checkpoint pretrain(const TrainConfig& cfg, TrainHistory* history = nullptr);

/// Continues `ckpt` (or a fresh initialization for gan / pi_gan) under
/// cfg.regime until cfg.total_epochs. Physics-guided regimes require a
/// checkpoint that has completed pre-training.
std::pair<Checkpoint, TrainHistory> train_regime(const TrainConfig& cfg, std::optional<Checkpoint> ckpt,
                                                 const Oracles& oracles);

/// Labels drawn uniformly over the box spanned by the training grid.
std::vector<Label> evaluation_labels(const TrainConfig& cfg, Rng& rng);

/// Mean residual of samples_per_label fresh generations per label, in label
/// order.
std::vector<double> evaluate(const GeneratorNet& gen, const Normalizer& normalizer, std::span<const Label> labels,
                             int samples_per_label, Rng& rng, const BlackBoxOracle& oracle);

struct Evaluation {
  std::vector<Label> labels;
  std::vector<double> residuals;  // samples_per_label consecutive entries per label
};

/// evaluation_labels + evaluate, both drawn from Rng(evaluation_seed(cfg.seed)).
Evaluation evaluate_checkpoint(const TrainConfig& cfg, const Checkpoint& ckpt, const BlackBoxOracle& oracle);

/// Seed of the evaluation stream for a run; shared by all regimes of a seed
/// so they are scored on the same labels and noise.
inline std::uint64_t evaluation_seed(std::uint64_t run_seed) { return run_seed ^ 0xe7a1'0a7e'5eed'0000ull; }

}  // namespace pggan
