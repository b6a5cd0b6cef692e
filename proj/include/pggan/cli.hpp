#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pggan/config.hpp"

namespace pggan {

// Output layout under the experiment directory:
//
//   config.txt                         resolved configuration (compare)
//   dataset.csv                        gen-data
//   seed_<s>/pretrain.ckpt             pretrain, compare
//   seed_<s>/pretrain_history.csv
//   seed_<s>/<regime>/model.ckpt       train, compare
//   seed_<s>/<regime>/history.csv
//   seed_<s>/<regime>/residuals.csv    evaluate, compare (v0,phi,residual)
//   table.csv, runs.json, boxplot.svg  report, compare

std::filesystem::path seed_dir(const std::filesystem::path& root, std::uint64_t seed);
std::filesystem::path regime_dir(const std::filesystem::path& root, std::uint64_t seed, Regime regime);

/// Runs every (seed, regime) cell of cfg and emits the report. Each seed is
/// pre-trained once; every regime continues from that checkpoint. Progress
/// lines go to `log`.
void run_compare(const ExperimentConfig& cfg, std::ostream& log);

/// args[0] is the program name. Returns the process exit code: 0 on success,
/// 1 on a runtime failure, 2 on a usage error.
int cmd_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pggan
