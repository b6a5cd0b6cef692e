#include "pggan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "pggan/format.hpp"

namespace pggan {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::gan: return "gan";
    case Regime::pi_gan: return "pi_gan";
    case Regime::pg_gan: return "pg_gan";
    case Regime::pg_pi_gan: return "pg_pi_gan";
  }
  return "?";
}

std::string_view display_name(Regime r) {
  switch (r) {
    case Regime::gan: return "GAN";
    case Regime::pi_gan: return "PI-GAN";
    case Regime::pg_gan: return "PG-GAN";
    case Regime::pg_pi_gan: return "PG-PI-GAN";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  for (Regime r : kAllRegimes)
    if (name == to_string(r) || name == display_name(r)) return r;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "' (expected gan, pi_gan, pg_gan, pg_pi_gan)");
}

void TrainConfig::validate() const {
  physics.validate();
  if (pretrain_epochs < 0 || total_epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be non-negative");
  if (is_physics_guided(regime) && total_epochs < pretrain_epochs)
    throw std::invalid_argument("TrainConfig: total_epochs must be >= pretrain_epochs for physics-guided regimes");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (v0_values.empty() || phi_values.empty()) throw std::invalid_argument("TrainConfig: empty dataset grid");
  if (static_cast<std::size_t>(batch_size) > v0_values.size() * phi_values.size())
    throw std::invalid_argument("TrainConfig: batch_size " + std::to_string(batch_size) + " exceeds the " +
                                std::to_string(v0_values.size() * phi_values.size()) + "-record grid");
  if (lambda < 0) throw std::invalid_argument("TrainConfig: lambda must be non-negative");
  if (net.noise_dim < 1 || net.hidden_width < 1 || net.hidden_layers < 0)
    throw std::invalid_argument("TrainConfig: invalid network shape");
  if (eval_labels < 1 || eval_samples_per_label < 1)
    throw std::invalid_argument("TrainConfig: evaluation counts must be >= 1");
  if (schedule.bands().empty()) throw std::invalid_argument("TrainConfig: empty epsilon schedule");
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,d_loss,g_loss,epsilon,r_frac\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << format_double(h.d_loss) << ',' << format_double(h.g_loss) << ',';
    if (h.epsilon) out << format_double(*h.epsilon);
    out << ',';
    if (h.r_frac) out << format_double(*h.r_frac);
    out << '\n';
  }
}

Dataset make_dataset(const TrainConfig& cfg) { return build_dataset(cfg.v0_values, cfg.phi_values, cfg.physics); }

Checkpoint initial_checkpoint(const TrainConfig& cfg, const Dataset& ds) {
  cfg.validate();
  Checkpoint c;
  c.rng = Rng(cfg.seed);
  const int traj_dim = cfg.physics.flat_size();
  c.gen = GeneratorNet::create(cfg.net, traj_dim, c.rng);
  c.disc = DiscriminatorNet::create(cfg.net, traj_dim, c.rng);
  c.gen_opt = AdamState<double>::fresh(c.gen.params, cfg.adam);
  c.disc_opt = AdamState<double>::fresh(c.disc.params, cfg.adam);
  c.normalizer = fit_normalizer(ds);
  c.epoch = 0;
  return c;
}

namespace {

// The training set in network coordinates, built once per run.
struct NormalizedData {
  Eigen::MatrixXd traj;    // traj_dim x N
  Eigen::Matrix2Xd label;  // 2 x N
  std::vector<Label> labels;

  NormalizedData(const Dataset& ds, const Normalizer& norm)
      : traj(norm.traj_mean.size(), static_cast<Eigen::Index>(ds.size())),
        label(2, static_cast<Eigen::Index>(ds.size())) {
    labels.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      traj.col(col) = norm.normalize(ds.records[i].trajectory);
      label.col(col) = norm.normalize(ds.records[i].label);
      labels.push_back(ds.records[i].label);
    }
  }
};

Eigen::MatrixXd draw_noise(int noise_dim, Eigen::Index count, Rng& rng) {
  Eigen::MatrixXd z(noise_dim, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (int i = 0; i < noise_dim; ++i) z(i, j) = rng.normal();
  return z;
}

std::vector<double> scores_of(const MlpTape<double>& tape) {
  return {tape.output.data(), tape.output.data() + tape.output.size()};
}

void require_finite(double v, const char* what, long epoch) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("non-finite ") + what + " at epoch " + std::to_string(epoch));
}

class EpochRunner {
 public:
  EpochRunner(const TrainConfig& cfg, Regime regime, const NormalizedData& data, const Oracles& oracles)
      : cfg_(cfg), regime_(regime), data_(data), oracles_(oracles) {}

  HistoryRecord run(Checkpoint& c, long epoch) {
    const auto batch = static_cast<Eigen::Index>(cfg_.batch_size);
    const auto idx = sample_indices(data_.labels.size(), static_cast<std::size_t>(cfg_.batch_size), c.rng);
    const Eigen::Index dim = data_.traj.rows();

    Eigen::MatrixXd real(dim, batch);
    Eigen::MatrixXd labels_norm(2, batch);
    std::vector<Label> labels(idx.size());
    for (Eigen::Index j = 0; j < batch; ++j) {
      const auto i = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]);
      real.col(j) = data_.traj.col(i);
      labels_norm.col(j) = data_.label.col(i);
      labels[static_cast<std::size_t>(j)] = data_.labels[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd z = draw_noise(c.gen.noise_dim, batch, c.rng);
    const MlpTape<double> gen_tape = generate(c.gen, z, labels_norm);
    const Eigen::MatrixXd& fake = gen_tape.output;

    HistoryRecord rec;
    rec.epoch = epoch;

    Partition part;
    if (is_physics_guided(regime_)) {
      const double eps = cfg_.schedule.at(epoch);
      std::vector<double> residuals(idx.size());
      for (Eigen::Index j = 0; j < batch; ++j)
        residuals[static_cast<std::size_t>(j)] = oracles_.referee->mean_residual(
            c.normalizer.denormalize_trajectory(fake.col(j)), labels[static_cast<std::size_t>(j)]);
      part = partition_residuals(residuals, eps);
      rec.epsilon = eps;
      rec.r_frac = static_cast<double>(part.real_like.size()) / static_cast<double>(batch);
    }

    // Discriminator step.
    if (is_physics_guided(regime_) && cfg_.pg_dataset_in_real_set) {
      Eigen::MatrixXd both(dim, 2 * batch);
      both << real, fake;
      Eigen::MatrixXd both_labels(2, 2 * batch);
      both_labels << labels_norm, labels_norm;
      Partition joint;
      for (std::size_t i = 0; i < idx.size(); ++i) joint.real_like.push_back(i);
      for (std::size_t i : part.real_like) joint.real_like.push_back(idx.size() + i);
      for (std::size_t i : part.fake_like) joint.fake_like.push_back(idx.size() + i);
      const auto tape = discriminate(c.disc, both, both_labels);
      const auto scores = scores_of(tape);
      const LossGrad dl = disc_loss_pg(scores, joint);
      rec.d_loss = dl.loss;
      require_finite(rec.d_loss, "discriminator loss", epoch);
      const auto grads = mlp_backward(c.disc.spec, c.disc.params, tape, dl.grad.transpose());
      adam_step(c.disc.params, grads.params, c.disc_opt);
    } else if (is_physics_guided(regime_)) {
      const auto tape = discriminate(c.disc, fake, labels_norm);
      const auto scores = scores_of(tape);
      const LossGrad dl = disc_loss_pg(scores, part);
      rec.d_loss = dl.loss;
      require_finite(rec.d_loss, "discriminator loss", epoch);
      const auto grads = mlp_backward(c.disc.spec, c.disc.params, tape, dl.grad.transpose());
      adam_step(c.disc.params, grads.params, c.disc_opt);
    } else {
      Eigen::MatrixXd both(dim, 2 * batch);
      both << real, fake;
      Eigen::MatrixXd both_labels(2, 2 * batch);
      both_labels << labels_norm, labels_norm;
      const auto tape = discriminate(c.disc, both, both_labels);
      const auto scores = scores_of(tape);
      const std::span<const double> all(scores);
      const DiscLossGan dl = disc_loss_gan(all.first(idx.size()), all.subspan(idx.size()));
      rec.d_loss = dl.loss;
      require_finite(rec.d_loss, "discriminator loss", epoch);
      Eigen::RowVectorXd upstream(2 * batch);
      upstream << dl.real_grad.transpose(), dl.fake_grad.transpose();
      const auto grads = mlp_backward(c.disc.spec, c.disc.params, tape, upstream);
      adam_step(c.disc.params, grads.params, c.disc_opt);
    }

    // Generator step, scored by the updated discriminator.
    const auto tape = discriminate(c.disc, fake, labels_norm);
    const auto scores = scores_of(tape);
    LossGrad gl;
    if (is_physics_guided(regime_))
      gl = cfg_.non_saturating ? gen_loss_pg_nonsaturating(scores, part) : gen_loss_pg(scores, part);
    else
      gl = cfg_.non_saturating ? gen_loss_gan_nonsaturating(scores) : gen_loss_gan(scores);
    rec.g_loss = gl.loss;

    const Eigen::MatrixXd disc_input_grad = mlp_input_gradient(c.disc.spec, c.disc.params, tape, gl.grad.transpose());
    Eigen::MatrixXd upstream = disc_input_grad.topRows(dim);

    if (is_physics_informed(regime_)) {
      const double inv_batch = 1.0 / static_cast<double>(batch);
      double penalty = 0.0;
      for (Eigen::Index j = 0; j < batch; ++j) {
        const PiPenalty p = pi_penalty(fake.col(j), labels[static_cast<std::size_t>(j)], c.normalizer,
                                       PiWeight{cfg_.lambda}, *oracles_.differentiable);
        penalty += p.value;
        upstream.col(j) += inv_batch * p.grad;
      }
      rec.g_loss += penalty * inv_batch;
    }
    require_finite(rec.g_loss, "generator loss", epoch);

    const auto grads = mlp_backward(c.gen.spec, c.gen.params, gen_tape, upstream);
    adam_step(c.gen.params, grads.params, c.gen_opt);
    return rec;
  }

 private:
  const TrainConfig& cfg_;
  Regime regime_;
  const NormalizedData& data_;
  const Oracles& oracles_;
};

void run_epochs(const TrainConfig& cfg, Regime regime, const Dataset& ds, Checkpoint& c, long until,
                const Oracles& oracles, TrainHistory* history) {
  if (c.epoch >= until) return;
  const NormalizedData data(ds, c.normalizer);
  EpochRunner runner(cfg, regime, data, oracles);
  if (history) history->reserve(history->size() + static_cast<std::size_t>(until - c.epoch));
  for (; c.epoch < until; ++c.epoch) {
    HistoryRecord rec = runner.run(c, c.epoch);
    if (history) history->push_back(rec);
  }
}

}  // namespace

Checkpoint pretrain(const TrainConfig& cfg, TrainHistory* history) {
  cfg.validate();
  const Dataset ds = make_dataset(cfg);
  Checkpoint c = initial_checkpoint(cfg, ds);
  run_epochs(cfg, Regime::gan, ds, c, cfg.pretrain_epochs, Oracles{}, history);
  return c;
}

std::pair<Checkpoint, TrainHistory> train_regime(const TrainConfig& cfg, std::optional<Checkpoint> ckpt,
                                                 const Oracles& oracles) {
  cfg.validate();
  if (is_physics_guided(cfg.regime)) {
    if (!ckpt)
      throw std::invalid_argument("train_regime: " + std::string(to_string(cfg.regime)) +
                                  " requires a pre-trained checkpoint");
    if (ckpt->epoch < cfg.pretrain_epochs)
      throw std::invalid_argument("train_regime: checkpoint at epoch " + std::to_string(ckpt->epoch) +
                                  " has not finished pre-training (" + std::to_string(cfg.pretrain_epochs) +
                                  " epochs)");
    if (!oracles.referee) throw std::invalid_argument("train_regime: physics-guided regime needs a referee oracle");
  }
  if (is_physics_informed(cfg.regime) && !oracles.differentiable)
    throw std::invalid_argument("train_regime: " + std::string(to_string(cfg.regime)) +
                                " requires a differentiable oracle");

  const Dataset ds = make_dataset(cfg);
  Checkpoint c = ckpt ? std::move(*ckpt) : initial_checkpoint(cfg, ds);
  TrainHistory history;
  run_epochs(cfg, cfg.regime, ds, c, cfg.total_epochs, oracles, &history);
  return {std::move(c), std::move(history)};
}

std::vector<Label> evaluation_labels(const TrainConfig& cfg, Rng& rng) {
  const auto [v0_lo, v0_hi] = std::minmax_element(cfg.v0_values.begin(), cfg.v0_values.end());
  const auto [phi_lo, phi_hi] = std::minmax_element(cfg.phi_values.begin(), cfg.phi_values.end());
  if (v0_lo == cfg.v0_values.end() || phi_lo == cfg.phi_values.end())
    throw std::invalid_argument("evaluation_labels: empty grid");
  std::vector<Label> labels;
  labels.reserve(static_cast<std::size_t>(cfg.eval_labels));
  for (int i = 0; i < cfg.eval_labels; ++i) {
    const double v0 = rng.uniform(*v0_lo, *v0_hi);
    const double phi = rng.uniform(*phi_lo, *phi_hi);
    labels.push_back({v0, phi});
  }
  return labels;
}

std::vector<double> evaluate(const GeneratorNet& gen, const Normalizer& normalizer, std::span<const Label> labels,
                             int samples_per_label, Rng& rng, const BlackBoxOracle& oracle) {
  if (samples_per_label < 1) throw std::invalid_argument("evaluate: samples_per_label must be >= 1");
  const auto count = static_cast<Eigen::Index>(labels.size()) * samples_per_label;
  std::vector<double> residuals;
  if (count == 0) return residuals;
  Eigen::MatrixXd labels_norm(2, count);
  std::vector<const Label*> owner(static_cast<std::size_t>(count));
  Eigen::Index col = 0;
  for (const Label& l : labels)
    for (int s = 0; s < samples_per_label; ++s, ++col) {
      labels_norm.col(col) = normalizer.normalize(l);
      owner[static_cast<std::size_t>(col)] = &l;
    }
  const Eigen::MatrixXd z = draw_noise(gen.noise_dim, count, rng);
  const auto tape = generate(gen, z, labels_norm);
  residuals.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index j = 0; j < count; ++j)
    residuals.push_back(
        oracle.mean_residual(normalizer.denormalize_trajectory(tape.output.col(j)), *owner[static_cast<std::size_t>(j)]));
  return residuals;
}

Evaluation evaluate_checkpoint(const TrainConfig& cfg, const Checkpoint& ckpt, const BlackBoxOracle& oracle) {
  Rng rng(evaluation_seed(cfg.seed));
  Evaluation out;
  out.labels = evaluation_labels(cfg, rng);
  out.residuals = evaluate(ckpt.gen, ckpt.normalizer, out.labels, cfg.eval_samples_per_label, rng, oracle);
  return out;
}

}  // namespace pggan
