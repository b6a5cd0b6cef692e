// Checkpoint container (all integers little-endian):
//
//   magic    8 bytes  "PGGANCKP"
//   version  u32      Checkpoint::kFormatVersion
//   epoch    i64
//   rng      4 x u64  xoshiro256** state
//   generator:      noise_dim u32, spec, params
//   discriminator:  spec, params
//   generator Adam, discriminator Adam:
//                   step u64, lr/beta1/beta2/eps f64, first moment, second moment
//   normalizer:     traj_mean, traj_std, label_mean, label_std (vectors)
//
// spec    = u32 layer count + 1, u32 widths, u8 hidden activation, u8 output activation
// params  = per layer: matrix weight, vector bias
// matrix  = u64 rows, u64 cols, rows*cols f64 column-major
// vector  = u64 size, size f64
// f64 values are IEEE-754 bit patterns, so every double round-trips exactly.

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "pggan/trainer.hpp"

namespace pggan {

namespace {

constexpr char kMagic[8] = {'P', 'G', 'G', 'A', 'N', 'C', 'K', 'P'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  template <typename Derived>
  void matrix(const Eigen::DenseBase<Derived>& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) f64(m(i, j));
  }
  template <typename Derived>
  void vector(const Eigen::DenseBase<Derived>& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }

  void spec(const MlpSpec& s) {
    u32(static_cast<std::uint32_t>(s.layer_widths.size()));
    for (int w : s.layer_widths) u32(static_cast<std::uint32_t>(w));
    u8(static_cast<std::uint8_t>(s.hidden_activation));
    u8(static_cast<std::uint8_t>(s.output_activation));
  }
  void params(const MlpParams<double>& p) {
    for (const auto& l : p.layers) {
      matrix(l.weight);
      vector(l.bias);
    }
  }
  void adam(const AdamState<double>& a) {
    u64(a.step_count);
    f64(a.hyper.learning_rate);
    f64(a.hyper.beta1);
    f64(a.hyper.beta2);
    f64(a.hyper.eps_stability);
    params(a.first_moment);
    params(a.second_moment);
  }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }

  Eigen::MatrixXd matrix() {
    const auto rows = size("matrix rows");
    const auto cols = size("matrix cols");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = f64();
    return m;
  }
  Eigen::VectorXd vector() {
    const auto n = size("vector size");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }

  MlpSpec spec() {
    MlpSpec s;
    const std::uint32_t n = u32();
    if (n < 2 || n > 64) throw std::runtime_error("checkpoint: implausible layer count");
    for (std::uint32_t i = 0; i < n; ++i) s.layer_widths.push_back(static_cast<int>(u32()));
    s.hidden_activation = activation(u8());
    s.output_activation = activation(u8());
    s.validate();
    return s;
  }
  MlpParams<double> params(const MlpSpec& s) {
    MlpParams<double> p;
    for (int l = 0; l < s.num_layers(); ++l) {
      auto w = matrix();
      auto b = vector();
      p.layers.push_back({std::move(w), std::move(b)});
    }
    if (!p.matches(s)) throw std::runtime_error("checkpoint: parameter shapes do not match spec");
    return p;
  }
  AdamState<double> adam(const MlpSpec& s) {
    AdamState<double> a;
    a.step_count = u64();
    a.hyper.learning_rate = f64();
    a.hyper.beta1 = f64();
    a.hyper.beta2 = f64();
    a.hyper.eps_stability = f64();
    a.first_moment = params(s);
    a.second_moment = params(s);
    return a;
  }

 private:
  static Activation activation(std::uint8_t v) {
    if (v > static_cast<std::uint8_t>(Activation::sigmoid)) throw std::runtime_error("checkpoint: bad activation tag");
    return static_cast<Activation>(v);
  }
  Eigen::Index size(const char* what) {
    const std::uint64_t n = u64();
    if (n > (1ull << 28)) throw std::runtime_error(std::string("checkpoint: implausible ") + what);
    return static_cast<Eigen::Index>(n);
  }
  std::uint64_t le(int bytes) {
    unsigned char buf[8];
    if (!in_.read(reinterpret_cast<char*>(buf), bytes)) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

}  // namespace

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  return a.epoch == b.epoch && a.rng == b.rng && a.gen.noise_dim == b.gen.noise_dim && a.gen.spec == b.gen.spec &&
         a.gen.params == b.gen.params && a.disc.spec == b.disc.spec && a.disc.params == b.disc.params &&
         a.gen_opt == b.gen_opt && a.disc_opt == b.disc_opt && a.normalizer == b.normalizer;
}

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.u32(Checkpoint::kFormatVersion);
  w.u64(static_cast<std::uint64_t>(ckpt.epoch));
  for (std::uint64_t s : ckpt.rng.state()) w.u64(s);
  w.u32(static_cast<std::uint32_t>(ckpt.gen.noise_dim));
  w.spec(ckpt.gen.spec);
  w.params(ckpt.gen.params);
  w.spec(ckpt.disc.spec);
  w.params(ckpt.disc.params);
  w.adam(ckpt.gen_opt);
  w.adam(ckpt.disc_opt);
  w.vector(ckpt.normalizer.traj_mean);
  w.vector(ckpt.normalizer.traj_std);
  w.vector(ckpt.normalizer.label_mean);
  w.vector(ckpt.normalizer.label_std);
  if (!out) throw std::runtime_error("save_checkpoint: write failed");
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("load_checkpoint: not a checkpoint file");
  Reader r(in);
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kFormatVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version " + std::to_string(version));
  Checkpoint c;
  c.epoch = static_cast<long>(r.u64());
  Rng::State state;
  for (auto& s : state) s = r.u64();
  c.rng.set_state(state);
  c.gen.noise_dim = static_cast<int>(r.u32());
  c.gen.spec = r.spec();
  c.gen.params = r.params(c.gen.spec);
  c.disc.spec = r.spec();
  c.disc.params = r.params(c.disc.spec);
  c.gen_opt = r.adam(c.gen.spec);
  c.disc_opt = r.adam(c.disc.spec);
  c.normalizer.traj_mean = r.vector();
  c.normalizer.traj_std = r.vector();
  const Eigen::VectorXd lm = r.vector();
  const Eigen::VectorXd ls = r.vector();
  if (lm.size() != 2 || ls.size() != 2) throw std::runtime_error("load_checkpoint: label normalizer must be 2-d");
  c.normalizer.label_mean = lm;
  c.normalizer.label_std = ls;
  if (c.gen.spec.input_width() != c.gen.noise_dim + 2 || c.normalizer.traj_mean.size() != c.gen.traj_dim() ||
      c.disc.traj_dim() != c.gen.traj_dim())
    throw std::runtime_error("load_checkpoint: inconsistent network dimensions");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace pggan
