#include "pggan/config.hpp"

#include <charconv>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pggan/format.hpp"

namespace pggan {

namespace {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string_view key, const std::string& what)
      : std::invalid_argument("config key '" + std::string(key) + "': " + what) {}
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
  }
}

long to_integer(std::string_view key, std::string_view v) {
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  const long n = to_integer(key, v);
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max())
    throw ConfigError(key, "integer out of range");
  return static_cast<int>(n);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(v) + "'");
}

Point to_point(std::string_view key, std::string_view v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw ConfigError(key, "expected 'x,y', got '" + std::string(v) + "'");
  return Point(to_real(key, parts[0]), to_real(key, parts[1]));
}

// "first:last[:step]" or a comma-separated list.
std::vector<double> to_grid(std::string_view key, std::string_view v) {
  if (v.find(':') != std::string_view::npos) {
    const auto parts = split(v, ':');
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError(key, "expected first:last[:step]");
    const double step = parts.size() == 3 ? to_real(key, parts[2]) : 1.0;
    try {
      return range_values(to_real(key, parts[0]), to_real(key, parts[1]), step);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  }
  std::vector<double> out;
  for (auto p : split(v, ',')) out.push_back(to_real(key, p));
  return out;
}

EpsilonSchedule to_schedule(std::string_view key, std::string_view v) {
  std::vector<EpsilonBand> bands;
  for (auto item : split(v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ConfigError(key, "expected epoch:epsilon pairs, got '" + std::string(item) + "'");
    bands.push_back({to_integer(key, parts[0]), to_real(key, parts[1])});
  }
  try {
    return EpsilonSchedule(std::move(bands));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<Regime> to_regimes(std::string_view key, std::string_view v) {
  std::vector<Regime> out;
  for (auto p : split(v, ',')) {
    try {
      out.push_back(parse_regime(p));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  }
  return out;
}

Regime to_regime(std::string_view key, std::string_view v) {
  const auto rs = to_regimes(key, v);
  if (rs.size() != 1) throw ConfigError(key, "expected a single regime");
  return rs.front();
}

std::vector<std::uint64_t> to_seeds(std::string_view key, std::string_view v) {
  std::vector<std::uint64_t> out;
  for (auto p : split(v, ',')) out.push_back(to_unsigned(key, p));
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F&& fmt, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += fmt(xs[i]);
  }
  return s;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct KeySpec {
  Setter set;
  Getter get;
};

// desk_scale is resolved before the table is applied and is not listed here.
const std::map<std::string, KeySpec, std::less<>>& key_table() {
  static const std::map<std::string, KeySpec, std::less<>> table = {
      {"regime",
       {[](auto& c, auto k, auto v) { c.train.regime = to_regime(k, v); },
        [](const auto& c) { return std::string(to_string(c.train.regime)); }}},
      {"regimes",
       {[](auto& c, auto k, auto v) { c.regimes = to_regimes(k, v); },
        [](const auto& c) { return join(c.regimes, [](Regime r) { return std::string(to_string(r)); }); }}},
      {"seed",
       {[](auto& c, auto k, auto v) { c.train.seed = to_unsigned(k, v); },
        [](const auto& c) { return std::to_string(c.train.seed); }}},
      {"seeds",
       {[](auto& c, auto k, auto v) { c.seeds = to_seeds(k, v); },
        [](const auto& c) { return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }); }}},
      {"out_dir", {[](auto& c, auto, auto v) { c.out_dir = std::string(v); }, [](const auto& c) { return c.out_dir; }}},
      {"pretrain_epochs",
       {[](auto& c, auto k, auto v) { c.train.pretrain_epochs = to_integer(k, v); },
        [](const auto& c) { return std::to_string(c.train.pretrain_epochs); }}},
      {"total_epochs",
       {[](auto& c, auto k, auto v) { c.train.total_epochs = to_integer(k, v); },
        [](const auto& c) { return std::to_string(c.train.total_epochs); }}},
      {"batch_size",
       {[](auto& c, auto k, auto v) { c.train.batch_size = to_int(k, v); },
        [](const auto& c) { return std::to_string(c.train.batch_size); }}},
      {"lambda",
       {[](auto& c, auto k, auto v) { c.train.lambda = to_real(k, v); },
        [](const auto& c) { return format_double(c.train.lambda); }}},
      {"learning_rate",
       {[](auto& c, auto k, auto v) { c.train.adam.learning_rate = to_real(k, v); },
        [](const auto& c) { return format_double(c.train.adam.learning_rate); }}},
      {"beta1",
       {[](auto& c, auto k, auto v) { c.train.adam.beta1 = to_real(k, v); },
        [](const auto& c) { return format_double(c.train.adam.beta1); }}},
      {"beta2",
       {[](auto& c, auto k, auto v) { c.train.adam.beta2 = to_real(k, v); },
        [](const auto& c) { return format_double(c.train.adam.beta2); }}},
      {"adam_epsilon",
       {[](auto& c, auto k, auto v) { c.train.adam.eps_stability = to_real(k, v); },
        [](const auto& c) { return format_double(c.train.adam.eps_stability); }}},
      {"noise_dim",
       {[](auto& c, auto k, auto v) { c.train.net.noise_dim = to_int(k, v); },
        [](const auto& c) { return std::to_string(c.train.net.noise_dim); }}},
      {"hidden_width",
       {[](auto& c, auto k, auto v) { c.train.net.hidden_width = to_int(k, v); },
        [](const auto& c) { return std::to_string(c.train.net.hidden_width); }}},
      {"hidden_layers",
       {[](auto& c, auto k, auto v) { c.train.net.hidden_layers = to_int(k, v); },
        [](const auto& c) { return std::to_string(c.train.net.hidden_layers); }}},
      {"non_saturating",
       {[](auto& c, auto k, auto v) { c.train.non_saturating = to_bool(k, v); },
        [](const auto& c) { return std::string(c.train.non_saturating ? "true" : "false"); }}},
      {"pg_real_data",
       {[](auto& c, auto k, auto v) { c.train.pg_dataset_in_real_set = to_bool(k, v); },
        [](const auto& c) { return std::string(c.train.pg_dataset_in_real_set ? "true" : "false"); }}},
      {"dt",
       {[](auto& c, auto k, auto v) { c.train.physics.dt = to_real(k, v); },
        [](const auto& c) { return format_double(c.train.physics.dt); }}},
      {"n_steps",
       {[](auto& c, auto k, auto v) { c.train.physics.n_steps = to_int(k, v); },
        [](const auto& c) { return std::to_string(c.train.physics.n_steps); }}},
      {"gravity",
       {[](auto& c, auto k, auto v) { c.train.physics.g = to_point(k, v); },
        [](const auto& c) { return format_double(c.train.physics.g.x()) + "," + format_double(c.train.physics.g.y()); }}},
      {"x0",
       {[](auto& c, auto k, auto v) { c.train.physics.x0 = to_point(k, v); },
        [](const auto& c) {
          return format_double(c.train.physics.x0.x()) + "," + format_double(c.train.physics.x0.y());
        }}},
      {"v0_values",
       {[](auto& c, auto k, auto v) { c.train.v0_values = to_grid(k, v); },
        [](const auto& c) { return join(c.train.v0_values, format_double); }}},
      {"phi_values",
       {[](auto& c, auto k, auto v) { c.train.phi_values = to_grid(k, v); },
        [](const auto& c) { return join(c.train.phi_values, format_double); }}},
      {"epsilon_bands",
       {[](auto& c, auto k, auto v) { c.base_schedule = to_schedule(k, v); },
        [](const auto& c) {
          return join(c.base_schedule.bands(),
                      [](const EpsilonBand& b) { return std::to_string(b.epoch_start) + ":" + format_double(b.epsilon); });
        }}},
      {"epsilon_scale",
       {[](auto& c, auto k, auto v) { c.epsilon_scale = to_real(k, v); },
        [](const auto& c) { return format_double(c.epsilon_scale); }}},
      {"eval_labels",
       {[](auto& c, auto k, auto v) { c.train.eval_labels = to_int(k, v); },
        [](const auto& c) { return std::to_string(c.train.eval_labels); }}},
      {"eval_samples_per_label",
       {[](auto& c, auto k, auto v) { c.train.eval_samples_per_label = to_int(k, v); },
        [](const auto& c) { return std::to_string(c.train.eval_samples_per_label); }}},
  };
  return table;
}

std::vector<std::pair<std::string, std::string>> parse_lines(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    if (key != "desk_scale" && !key_table().contains(key))
      throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second)
      throw std::invalid_argument("config: key '" + std::string(key) + "' given more than once");
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("config: seeds must be distinct");
  if (regimes.empty()) throw std::invalid_argument("config: regimes must not be empty");
  if (std::set<Regime>(regimes.begin(), regimes.end()).size() != regimes.size())
    throw std::invalid_argument("config: regimes must be distinct");
  if (!(epsilon_scale > 0)) throw std::invalid_argument("config: epsilon_scale must be positive");
  for (Regime r : regimes) {
    TrainConfig t = train;
    t.regime = r;
    t.validate();
  }
  train.validate();
}

void apply_desk_scale(ExperimentConfig& cfg) {
  cfg.desk_scale = true;
  cfg.train.v0_values = range_values(1, 20, 1);
  cfg.train.phi_values = range_values(0, 90, 10);
  cfg.train.pretrain_epochs = 2'000;
  cfg.train.total_epochs = 10'000;
  cfg.base_schedule = EpsilonSchedule({{2'000, 5.0}, {4'000, 2.5}, {6'000, 1.25}, {8'000, 0.625}});
  cfg.train.schedule = cfg.base_schedule.scaled(cfg.epsilon_scale);
}

ExperimentConfig parse_config(std::string_view file_text, const CliOverrides& flags,
                              std::optional<std::string> env_out) {
  const auto entries = parse_lines(file_text);

  ExperimentConfig cfg;
  if (env_out && !env_out->empty()) cfg.out_dir = *env_out;

  bool desk = flags.desk_scale;
  for (const auto& [k, v] : entries)
    if (k == "desk_scale") desk = desk || to_bool(k, v);
  if (desk) apply_desk_scale(cfg);

  for (const auto& [k, v] : entries)
    if (k != "desk_scale") key_table().find(k)->second.set(cfg, k, v);

  if (flags.seed) {
    cfg.train.seed = *flags.seed;
    cfg.seeds = {*flags.seed};
  }
  if (flags.regime) {
    cfg.train.regime = to_regime("--regime", *flags.regime);
    cfg.regimes = {cfg.train.regime};
  }
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;
  if (flags.epochs) cfg.train.total_epochs = *flags.epochs;
  if (flags.lambda) cfg.train.lambda = *flags.lambda;

  if (!(cfg.epsilon_scale > 0)) throw ConfigError("epsilon_scale", "must be positive");
  cfg.train.schedule = cfg.base_schedule.scaled(cfg.epsilon_scale);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const CliOverrides& flags) {
  std::string text;
  if (flags.config_path) {
    std::ifstream in(*flags.config_path);
    if (!in) throw std::runtime_error("cannot read config file " + *flags.config_path);
    std::ostringstream s;
    s << in.rdbuf();
    text = s.str();
  }
  std::optional<std::string> env_out;
  if (const char* e = std::getenv("PGGAN_OUT")) env_out = e;
  return parse_config(text, flags, env_out);
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::string out = std::string("desk_scale = ") + (cfg.desk_scale ? "true" : "false") + "\n";
  for (const auto& [key, spec] : key_table()) out += key + " = " + spec.get(cfg) + "\n";
  return out;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.train == b.train && a.regimes == b.regimes && a.seeds == b.seeds && a.out_dir == b.out_dir &&
         a.desk_scale == b.desk_scale && a.epsilon_scale == b.epsilon_scale && a.base_schedule == b.base_schedule;
}

}  // namespace pggan
