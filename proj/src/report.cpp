#include "pggan/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pggan/format.hpp"

namespace pggan {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  if (p < 0 || p > 1) throw std::invalid_argument("quantile: p outside [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("quartiles: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5), quantile_sorted(sorted, 0.75)};
}

IqrSplit iqr_filter(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("iqr_filter: empty input");
  const Quartiles q = quartiles(values);
  const double iqr = q.q3 - q.q1;
  IqrSplit out;
  out.lower_fence = q.q1 - 1.5 * iqr;
  out.upper_fence = q.q3 + 1.5 * iqr;
  for (double v : values) (v < out.lower_fence || v > out.upper_fence ? out.outliers : out.kept).push_back(v);
  return out;
}

RunStats run_stats(std::span<const double> residuals, Regime regime, std::uint64_t seed) {
  if (residuals.empty()) throw std::invalid_argument("run_stats: empty residual list");
  const Quartiles q = quartiles(residuals);
  RunStats s;
  s.regime = regime;
  s.seed = seed;
  s.median = q.median;
  s.q1 = q.q1;
  s.q3 = q.q3;
  s.iqr = q.q3 - q.q1;
  s.n_samples = residuals.size();
  s.n_outliers = iqr_filter(residuals).outliers.size();
  return s;
}

AggregateStats aggregate_runs(std::span<const RunStats> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
  AggregateStats a;
  a.regime = runs.front().regime;
  for (const auto& r : runs) {
    if (r.regime != a.regime) throw std::invalid_argument("aggregate_runs: runs from different regimes");
    a.median += r.median;
    a.q1 += r.q1;
    a.iqr += r.iqr;
  }
  const auto n = static_cast<double>(runs.size());
  a.median /= n;
  a.q1 /= n;
  a.iqr /= n;
  a.run_count = runs.size();
  return a;
}

std::vector<AggregateStats> aggregate_by_regime(std::span<const RunStats> runs) {
  std::vector<AggregateStats> out;
  for (Regime regime : kAllRegimes) {
    std::vector<RunStats> group;
    for (const auto& r : runs)
      if (r.regime == regime) group.push_back(r);
    if (!group.empty()) out.push_back(aggregate_runs(group));
  }
  return out;
}

void write_table_csv(std::ostream& out, std::span<const AggregateStats> aggregates) {
  if (aggregates.empty()) throw std::invalid_argument("write_table_csv: no aggregates");
  std::vector<AggregateStats> cols(aggregates.begin(), aggregates.end());
  std::stable_sort(cols.begin(), cols.end(), [](const auto& a, const auto& b) { return a.regime < b.regime; });
  out << "statistic";
  for (const auto& a : cols) out << ',' << display_name(a.regime);
  out << '\n';
  const std::pair<const char*, double AggregateStats::*> rows[] = {
      {"Median", &AggregateStats::median},
      {"First quartile", &AggregateStats::q1},
      {"Interquartile range", &AggregateStats::iqr},
  };
  for (const auto& [name, field] : rows) {
    out << name;
    for (const auto& a : cols) out << ',' << format_double(a.*field);
    out << '\n';
  }
}

void write_runs_json(std::ostream& out, std::span<const RunStats> runs) {
  auto arr = nlohmann::json::array();
  for (const auto& r : runs) {
    arr.push_back({{"regime", std::string(to_string(r.regime))},
                   {"seed", r.seed},
                   {"median", r.median},
                   {"q1", r.q1},
                   {"q3", r.q3},
                   {"iqr", r.iqr},
                   {"n_samples", r.n_samples},
                   {"n_outliers", r.n_outliers}});
  }
  out << arr.dump(2) << '\n';
}

namespace {

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

void write_boxplot_svg(std::ostream& out, std::span<const RunStats> runs,
                       std::span<const std::vector<double>> residuals) {
  if (runs.size() != residuals.size()) throw std::invalid_argument("write_boxplot_svg: runs/residuals size mismatch");

  std::map<Regime, std::vector<double>> pooled;
  for (std::size_t i = 0; i < runs.size(); ++i)
    pooled[runs[i].regime].insert(pooled[runs[i].regime].end(), residuals[i].begin(), residuals[i].end());
  std::erase_if(pooled, [](const auto& kv) { return kv.second.empty(); });

  // log10 axis, floored.
  static constexpr double kFloor = 1e-6;
  auto lg = [](double v) { return std::log10(std::max(v, kFloor)); };
  double lo = 0.0, hi = 1.0;
  bool first = true;
  for (const auto& [regime, vals] : pooled)
    for (double v : vals) {
      lo = first ? lg(v) : std::min(lo, lg(v));
      hi = first ? lg(v) : std::max(hi, lg(v));
      first = false;
    }
  lo = std::floor(lo);
  hi = std::max(std::ceil(hi), lo + 1);

  const double width = 120.0 + 140.0 * static_cast<double>(std::max<std::size_t>(pooled.size(), 1));
  const double height = 420.0, top = 30.0, bottom = 370.0, left = 80.0;
  auto y = [&](double v) { return bottom - (lg(v) - lo) / (hi - lo) * (bottom - top); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\"" << fixed(height, 0)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  for (double d = lo; d <= hi + 1e-9; d += 1.0) {
    const double py = bottom - (d - lo) / (hi - lo) * (bottom - top);
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(py) << "\" x2=\"" << width - 20 << "\" y2=\"" << fixed(py)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << fixed(py + 4) << "\" text-anchor=\"end\">1e" << fixed(d, 0)
        << "</text>\n";
  }
  out << "<text x=\"20\" y=\"" << fixed((top + bottom) / 2) << "\" transform=\"rotate(-90 20 "
      << fixed((top + bottom) / 2) << ")\" text-anchor=\"middle\">residual</text>\n";

  std::size_t slot = 0;
  for (const auto& [regime, vals] : pooled) {
    const double cx = left + 70.0 + 140.0 * static_cast<double>(slot++);
    const Quartiles q = quartiles(vals);
    const IqrSplit split = iqr_filter(vals);
    const auto [wlo, whi] = std::minmax_element(split.kept.begin(), split.kept.end());
    out << "<g>\n";
    out << "<line x1=\"" << fixed(cx) << "\" y1=\"" << fixed(y(*whi)) << "\" x2=\"" << fixed(cx) << "\" y2=\""
        << fixed(y(q.q3)) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fixed(cx) << "\" y1=\"" << fixed(y(q.q1)) << "\" x2=\"" << fixed(cx) << "\" y2=\""
        << fixed(y(*wlo)) << "\" stroke=\"black\"/>\n";
    for (double w : {*wlo, *whi})
      out << "<line x1=\"" << fixed(cx - 20) << "\" y1=\"" << fixed(y(w)) << "\" x2=\"" << fixed(cx + 20) << "\" y2=\""
          << fixed(y(w)) << "\" stroke=\"black\"/>\n";
    out << "<rect x=\"" << fixed(cx - 40) << "\" y=\"" << fixed(y(q.q3)) << "\" width=\"80\" height=\""
        << fixed(std::max(y(q.q1) - y(q.q3), 0.5)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fixed(cx - 40) << "\" y1=\"" << fixed(y(q.median)) << "\" x2=\"" << fixed(cx + 40)
        << "\" y2=\"" << fixed(y(q.median)) << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    for (double o : split.outliers)
      out << "<circle cx=\"" << fixed(cx) << "\" cy=\"" << fixed(y(o)) << "\" r=\"2\" fill=\"none\" stroke=\"#555\"/>\n";
    out << "<text x=\"" << fixed(cx) << "\" y=\"" << fixed(bottom + 20) << "\" text-anchor=\"middle\">"
        << display_name(regime) << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
}

void emit_report(std::span<const AggregateStats> aggregates, std::span<const RunStats> runs,
                 std::span<const std::vector<double>> residuals, const std::filesystem::path& out_dir) {
  if (aggregates.empty()) throw std::invalid_argument("emit_report: no aggregates");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("emit_report: cannot write " + (out_dir / name).string());
    return f;
  };
  {
    auto f = open("table.csv");
    write_table_csv(f, aggregates);
  }
  {
    auto f = open("runs.json");
    write_runs_json(f, runs);
  }
  {
    auto f = open("boxplot.svg");
    write_boxplot_svg(f, runs, residuals);
  }
}

}  // namespace pggan
