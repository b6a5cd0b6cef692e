#pragma once

// Experiment configuration.
//
// Config files are flat `key = value` lines; `#` starts a comment, blank
// lines are ignored, unknown or repeated keys are errors. Values are resolved
// in this order, later winning:
//
//   built-in defaults -> desk-scale preset (if enabled) -> file -> flags
//
// `--seed N` sets both `seed` and `seeds = N`; `--regime R` likewise sets
// `regime` and `regimes = R`. When no output directory is given, $PGGAN_OUT
// is used, then "pggan_out".

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pggan/trainer.hpp"

namespace pggan {

struct ExperimentConfig {
  TrainConfig train;
  std::vector<Regime> regimes{std::begin(kAllRegimes), std::end(kAllRegimes)};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out_dir = "pggan_out";
  bool desk_scale = false;
  double epsilon_scale = 1.0;
  /// Schedule before epsilon_scale is applied; train.schedule holds the
  /// scaled result.
  EpsilonSchedule base_schedule = EpsilonSchedule::reference();

  void validate() const;
};

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> regime;
  std::optional<std::string> out_dir;
  bool desk_scale = false;
  std::optional<long> epochs;
  std::optional<double> lambda;
};

/// Grid 1..20 x 0:10:90, 2,000 pre-training and 10,000 total epochs, bands at
/// 2k/4k/6k/8k.
void apply_desk_scale(ExperimentConfig& cfg);

/// Resolves a configuration from file text (may be empty) and flags.
/// `env_out` is the value of $PGGAN_OUT, if set.
ExperimentConfig parse_config(std::string_view file_text, const CliOverrides& flags,
                              std::optional<std::string> env_out = std::nullopt);

/// Reads flags.config_path (if any) and $PGGAN_OUT, then parse_config.
ExperimentConfig load_config(const CliOverrides& flags);

/// Every key with its resolved value; parse_config(dump_config(c), {}) == c.
std::string dump_config(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace pggan
