#include "pggan/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "pggan/format.hpp"
#include "pggan/report.hpp"

namespace pggan {

namespace fs = std::filesystem;

fs::path seed_dir(const fs::path& root, std::uint64_t seed) { return root / ("seed_" + std::to_string(seed)); }

fs::path regime_dir(const fs::path& root, std::uint64_t seed, Regime regime) {
  return seed_dir(root, seed) / std::string(to_string(regime));
}

namespace {

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void write_residuals_csv(const fs::path& path, const Evaluation& ev, int samples_per_label) {
  auto f = open_out(path);
  f << "v0,phi,residual\n";
  for (std::size_t i = 0; i < ev.residuals.size(); ++i) {
    const Label& l = ev.labels[i / static_cast<std::size_t>(samples_per_label)];
    f << format_double(l.v0_mag) << ',' << format_double(l.phi_deg) << ',' << format_double(ev.residuals[i]) << '\n';
  }
}

std::vector<double> read_residuals_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    out.push_back(parse_double(std::string_view(line).substr(comma + 1)));
  }
  return out;
}

void save(const fs::path& path, const Checkpoint& ckpt) {
  fs::create_directories(path.parent_path());
  save_checkpoint(path.string(), ckpt);
}

void write_history(const fs::path& path, const TrainHistory& h) {
  auto f = open_out(path);
  write_history_csv(f, h);
}

TrainConfig for_regime(const ExperimentConfig& cfg, Regime r, std::uint64_t seed) {
  TrainConfig t = cfg.train;
  t.regime = r;
  t.seed = seed;
  return t;
}

std::optional<Checkpoint> load_pretrained(const fs::path& root, std::uint64_t seed, bool required) {
  const fs::path p = seed_dir(root, seed) / "pretrain.ckpt";
  if (!fs::exists(p)) {
    if (required) throw std::runtime_error("missing pre-trained checkpoint " + p.string() + " (run pretrain first)");
    return std::nullopt;
  }
  return load_checkpoint(p.string());
}

struct ReportInputs {
  std::vector<RunStats> runs;
  std::vector<std::vector<double>> residuals;
};

void emit(const ReportInputs& in, const fs::path& root) {
  const auto aggregates = aggregate_by_regime(in.runs);
  emit_report(aggregates, in.runs, in.residuals, root);
}

int cmd_gen_data(const ExperimentConfig& cfg, std::ostream& out) {
  const Dataset ds = make_dataset(cfg.train);
  const fs::path path = fs::path(cfg.out_dir) / "dataset.csv";
  auto f = open_out(path);
  write_dataset_csv(f, ds);
  out << "wrote " << ds.size() << " records to " << path.string() << '\n';
  return 0;
}

int cmd_pretrain(const ExperimentConfig& cfg, std::ostream& out) {
  TrainHistory history;
  const Checkpoint ckpt = pretrain(cfg.train, &history);
  const fs::path dir = seed_dir(cfg.out_dir, cfg.train.seed);
  save(dir / "pretrain.ckpt", ckpt);
  write_history(dir / "pretrain_history.csv", history);
  out << "pre-trained seed " << cfg.train.seed << " for " << ckpt.epoch << " epochs -> " << dir.string() << '\n';
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& out) {
  const Regime r = cfg.train.regime;
  const ProjectileModel physics(cfg.train.physics);
  auto ckpt = load_pretrained(cfg.out_dir, cfg.train.seed, is_physics_guided(r));
  auto [trained, history] = train_regime(cfg.train, std::move(ckpt), Oracles{&physics, &physics});
  const fs::path dir = regime_dir(cfg.out_dir, cfg.train.seed, r);
  save(dir / "model.ckpt", trained);
  write_history(dir / "history.csv", history);
  out << "trained " << to_string(r) << " seed " << cfg.train.seed << " to epoch " << trained.epoch << " -> "
      << dir.string() << '\n';
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, std::ostream& out) {
  const Regime r = cfg.train.regime;
  const fs::path dir = regime_dir(cfg.out_dir, cfg.train.seed, r);
  const Checkpoint ckpt = load_checkpoint((dir / "model.ckpt").string());
  const ProjectileModel physics(cfg.train.physics);
  const Evaluation ev = evaluate_checkpoint(cfg.train, ckpt, physics);
  write_residuals_csv(dir / "residuals.csv", ev, cfg.train.eval_samples_per_label);
  const RunStats s = run_stats(ev.residuals, r, cfg.train.seed);
  out << to_string(r) << " seed " << s.seed << ": median " << format_double(s.median) << ", q1 "
      << format_double(s.q1) << ", iqr " << format_double(s.iqr) << ", outliers " << s.n_outliers << '/'
      << s.n_samples << '\n';
  return 0;
}

int cmd_report(const ExperimentConfig& cfg, std::ostream& out) {
  ReportInputs in;
  for (std::uint64_t seed : cfg.seeds)
    for (Regime r : cfg.regimes) {
      const fs::path p = regime_dir(cfg.out_dir, seed, r) / "residuals.csv";
      if (!fs::exists(p)) continue;
      in.residuals.push_back(read_residuals_csv(p));
      in.runs.push_back(run_stats(in.residuals.back(), r, seed));
    }
  if (in.runs.empty()) throw std::runtime_error("no residuals.csv found under " + cfg.out_dir);
  emit(in, cfg.out_dir);
  out << "report for " << in.runs.size() << " runs -> " << cfg.out_dir << '\n';
  return 0;
}

}  // namespace

void run_compare(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path root = cfg.out_dir;
  fs::create_directories(root);
  {
    auto f = open_out(root / "config.txt");
    f << dump_config(cfg);
  }
  const ProjectileModel physics(cfg.train.physics);
  const Oracles oracles{&physics, &physics};

  ReportInputs in;
  for (std::uint64_t seed : cfg.seeds) {
    TrainConfig base = for_regime(cfg, Regime::gan, seed);
    TrainHistory pre_history;
    const Checkpoint pre = pretrain(base, &pre_history);
    save(seed_dir(root, seed) / "pretrain.ckpt", pre);
    write_history(seed_dir(root, seed) / "pretrain_history.csv", pre_history);
    log << "[seed " << seed << "] pre-trained " << pre.epoch << " epochs" << std::endl;

    for (Regime r : cfg.regimes) {
      const TrainConfig t = for_regime(cfg, r, seed);
      auto [trained, history] = train_regime(t, pre, oracles);
      const fs::path dir = regime_dir(root, seed, r);
      save(dir / "model.ckpt", trained);
      write_history(dir / "history.csv", history);
      const Evaluation ev = evaluate_checkpoint(t, trained, physics);
      write_residuals_csv(dir / "residuals.csv", ev, t.eval_samples_per_label);
      in.runs.push_back(run_stats(ev.residuals, r, seed));
      in.residuals.push_back(ev.residuals);
      const RunStats& s = in.runs.back();
      log << "[seed " << seed << "] " << to_string(r) << ": median " << format_double(s.median) << ", q1 "
          << format_double(s.q1) << ", iqr " << format_double(s.iqr) << std::endl;
    }
  }
  emit(in, root);
  log << "report -> " << (root / "table.csv").string() << std::endl;
}

int cmd_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Physics-guided GAN experiments on projectile trajectories", "pggan"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, regime, out_dir;
  std::uint64_t seed = 0;
  long epochs = 0;
  double lambda = 0.0;
  bool desk = false;
  CLI::Option* o_config = app.add_option("--config", config_path, "key = value config file");
  CLI::Option* o_seed = app.add_option("--seed", seed, "run seed (compare: the only seed)");
  CLI::Option* o_regime = app.add_option("--regime", regime, "gan, pi_gan, pg_gan or pg_pi_gan");
  CLI::Option* o_out = app.add_option("--out", out_dir, "output directory (default $PGGAN_OUT)");
  app.add_flag("--desk-scale", desk, "small grid and epoch counts");
  CLI::Option* o_epochs = app.add_option("--epochs", epochs, "total epochs");
  CLI::Option* o_lambda = app.add_option("--lambda", lambda, "physics-informed penalty weight");

  const std::pair<const char*, const char*> subcommands[] = {
      {"gen-data", "write the training dataset as CSV"},
      {"pretrain", "pre-train the conditional GAN for one seed"},
      {"train", "train one regime for one seed"},
      {"evaluate", "score a trained generator on fresh labels"},
      {"report", "aggregate residuals into table.csv, runs.json, boxplot.svg"},
      {"compare", "pre-train, train, evaluate every regime x seed and report"},
  };
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

  if (args.size() <= 1) {
    err << app.help();
    return 2;
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return 2;
  }

  CliOverrides flags;
  if (o_config->count()) flags.config_path = config_path;
  if (o_seed->count()) flags.seed = seed;
  if (o_regime->count()) flags.regime = regime;
  if (o_out->count()) flags.out_dir = out_dir;
  if (o_epochs->count()) flags.epochs = epochs;
  if (o_lambda->count()) flags.lambda = lambda;
  flags.desk_scale = desk;

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig cfg = load_config(flags);
    if (cmd == "gen-data") return cmd_gen_data(cfg, out);
    if (cmd == "pretrain") return cmd_pretrain(cfg, out);
    if (cmd == "train") return cmd_train(cfg, out);
    if (cmd == "evaluate") return cmd_evaluate(cfg, out);
    if (cmd == "report") return cmd_report(cfg, out);
    if (cmd == "compare") {
      run_compare(cfg, err);
      out << "wrote " << (fs::path(cfg.out_dir) / "table.csv").string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "pggan " << cmd << ": " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace pggan
