#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pggan/trainer.hpp"

namespace pggan {

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear interpolation at fractional index p (n - 1) of ascending data.
double quantile_sorted(std::span<const double> sorted, double p);

Quartiles quartiles(std::span<const double> values);

struct IqrSplit {
  std::vector<double> kept;
  std::vector<double> outliers;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
};

/// Tukey fences q1 - 1.5 iqr and q3 + 1.5 iqr; input order is preserved in
/// both outputs.
IqrSplit iqr_filter(std::span<const double> values);

struct RunStats {
  Regime regime = Regime::gan;
  std::uint64_t seed = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_outliers = 0;
};

/// Statistics of the unfiltered residuals; outliers are only counted.
RunStats run_stats(std::span<const double> residuals, Regime regime, std::uint64_t seed);

struct AggregateStats {
  Regime regime = Regime::gan;
  double median = 0.0;
  double q1 = 0.0;
  double iqr = 0.0;
  std::size_t run_count = 0;
};

AggregateStats aggregate_runs(std::span<const RunStats> runs);

/// Groups runs by regime and aggregates each group, in regime order.
std::vector<AggregateStats> aggregate_by_regime(std::span<const RunStats> runs);

void write_table_csv(std::ostream& out, std::span<const AggregateStats> aggregates);
void write_runs_json(std::ostream& out, std::span<const RunStats> runs);
/// residuals[i] belongs to runs[i]; boxes pool all runs of a regime.
void write_boxplot_svg(std::ostream& out, std::span<const RunStats> runs,
                       std::span<const std::vector<double>> residuals);

/// Writes table.csv, runs.json and boxplot.svg into out_dir.
void emit_report(std::span<const AggregateStats> aggregates, std::span<const RunStats> runs,
                 std::span<const std::vector<double>> residuals, const std::filesystem::path& out_dir);

}  // namespace pggan
