#pragma once

// Fixed-topology multilayer perceptrons over Eigen dense types.
//
// Batches are stored column-wise: an input of width n for B samples is an
// n x B matrix, and a single sample is simply a one-column matrix. Every
// function is a free template on the scalar type of the parameters.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pggan/rng.hpp"

namespace pggan {

enum class Activation { identity, relu, tanh, sigmoid };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

struct MlpSpec {
  std::vector<int> layer_widths;
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::identity;

  int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }
  int input_width() const { return layer_widths.front(); }
  int output_width() const { return layer_widths.back(); }

  Activation activation(int layer) const {
    return layer + 1 == num_layers() ? output_activation : hidden_activation;
  }

  void validate() const {
    if (layer_widths.size() < 2) throw std::invalid_argument("MlpSpec: need at least two layer widths");
    for (int w : layer_widths)
      if (w < 1) throw std::invalid_argument("MlpSpec: layer width must be >= 1, got " + std::to_string(w));
    if (hidden_activation != Activation::relu && hidden_activation != Activation::tanh)
      throw std::invalid_argument("MlpSpec: hidden activation must be relu or tanh");
    if (output_activation == Activation::relu)
      throw std::invalid_argument("MlpSpec: output activation must be identity, sigmoid or tanh");
  }

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weight;  // out_width x in_width
  VectorX<Scalar> bias;    // out_width
};

template <typename Scalar>
struct MlpParams {
  std::vector<DenseLayer<Scalar>> layers;

  MlpParams zeros_like() const {
    MlpParams z;
    z.layers.reserve(layers.size());
    for (const auto& l : layers)
      z.layers.push_back({MatrixX<Scalar>::Zero(l.weight.rows(), l.weight.cols()), VectorX<Scalar>::Zero(l.bias.size())});
    return z;
  }

  bool same_shape(const MlpParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].weight.rows() != other.layers[i].weight.rows() ||
          layers[i].weight.cols() != other.layers[i].weight.cols() ||
          layers[i].bias.size() != other.layers[i].bias.size())
        return false;
    }
    return true;
  }

  bool matches(const MlpSpec& spec) const {
    if (static_cast<int>(layers.size()) != spec.num_layers()) return false;
    for (int i = 0; i < spec.num_layers(); ++i) {
      if (layers[i].weight.rows() != spec.layer_widths[i + 1] || layers[i].weight.cols() != spec.layer_widths[i] ||
          layers[i].bias.size() != spec.layer_widths[i + 1])
        return false;
    }
    return true;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i)
      if (a.layers[i].weight != b.layers[i].weight || a.layers[i].bias != b.layers[i].bias) return false;
    return true;
  }
};

/// Values cached by mlp_forward for the reverse pass. inputs[l] is the input
/// to layer l and pre[l] its pre-activation; output is the network output.
template <typename Scalar>
struct MlpTape {
  std::vector<MatrixX<Scalar>> inputs;
  std::vector<MatrixX<Scalar>> pre;
  MatrixX<Scalar> output;

  Eigen::Index batch_size() const { return output.cols(); }
};

template <typename Scalar>
struct MlpGradients {
  MlpParams<Scalar> params;
  MatrixX<Scalar> input;
};

namespace detail {

template <typename Scalar>
MatrixX<Scalar> activate(Activation a, const MatrixX<Scalar>& pre) {
  switch (a) {
    case Activation::identity: return pre;
    case Activation::relu: return pre.cwiseMax(Scalar(0));
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::sigmoid: return (Scalar(1) / (Scalar(1) + (-pre.array()).exp())).matrix();
  }
  throw std::logic_error("unknown activation");
}

// Converts d(loss)/d(activated) into d(loss)/d(pre) in place.
template <typename Scalar>
void activation_backward(Activation a, const MatrixX<Scalar>& pre, const MatrixX<Scalar>& activated,
                         MatrixX<Scalar>& grad) {
  switch (a) {
    case Activation::identity: return;
    case Activation::relu: grad = (pre.array() > Scalar(0)).select(grad, Scalar(0)); return;
    case Activation::tanh: grad.array() *= Scalar(1) - activated.array().square(); return;
    case Activation::sigmoid: grad.array() *= activated.array() * (Scalar(1) - activated.array()); return;
  }
}

template <typename Scalar>
void check_tape(const MlpSpec& spec, const MlpParams<Scalar>& params, const MlpTape<Scalar>& tape,
                Eigen::Index upstream_rows, Eigen::Index upstream_cols) {
  if (!params.matches(spec)) throw std::invalid_argument("mlp_backward: parameters do not match spec");
  const auto n = static_cast<std::size_t>(spec.num_layers());
  if (tape.inputs.size() != n || tape.pre.size() != n)
    throw std::invalid_argument("mlp_backward: tape layer count does not match spec");
  for (std::size_t l = 0; l < n; ++l) {
    if (tape.inputs[l].rows() != spec.layer_widths[l] || tape.pre[l].rows() != spec.layer_widths[l + 1] ||
        tape.inputs[l].cols() != tape.output.cols() || tape.pre[l].cols() != tape.output.cols())
      throw std::invalid_argument("mlp_backward: stale or mismatched tape at layer " + std::to_string(l));
  }
  if (upstream_rows != spec.output_width() || upstream_cols != tape.output.cols())
    throw std::invalid_argument("mlp_backward: upstream gradient has shape " + std::to_string(upstream_rows) + "x" +
                                std::to_string(upstream_cols) + ", expected " + std::to_string(spec.output_width()) +
                                "x" + std::to_string(tape.output.cols()));
}

}  // namespace detail

/// Glorot-uniform weights, zero biases.
template <typename Scalar = double>
MlpParams<Scalar> init_params(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  MlpParams<Scalar> p;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / (in + out));
    DenseLayer<Scalar> layer{MatrixX<Scalar>(out, in), VectorX<Scalar>::Zero(out)};
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
        layer.weight(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
    p.layers.push_back(std::move(layer));
  }
  return p;
}

template <typename Scalar = double>
MlpParams<Scalar> zero_params(const MlpSpec& spec) {
  spec.validate();
  MlpParams<Scalar> p;
  for (int l = 0; l < spec.num_layers(); ++l)
    p.layers.push_back({MatrixX<Scalar>::Zero(spec.layer_widths[l + 1], spec.layer_widths[l]),
                        VectorX<Scalar>::Zero(spec.layer_widths[l + 1])});
  return p;
}

template <typename Scalar, typename Derived>
MlpTape<Scalar> mlp_forward(const MlpSpec& spec, const MlpParams<Scalar>& params,
                            const Eigen::MatrixBase<Derived>& input) {
  if (!params.matches(spec)) throw std::invalid_argument("mlp_forward: parameters do not match spec");
  if (input.rows() != spec.input_width())
    throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.rows()) + ", expected " +
                                std::to_string(spec.input_width()));
  MlpTape<Scalar> tape;
  tape.inputs.reserve(params.layers.size());
  tape.pre.reserve(params.layers.size());
  MatrixX<Scalar> x = input.template cast<Scalar>();
  for (int l = 0; l < spec.num_layers(); ++l) {
    const auto& layer = params.layers[l];
    MatrixX<Scalar> z = layer.weight * x;
    z.colwise() += layer.bias;
    MatrixX<Scalar> a = detail::activate(spec.activation(l), z);
    tape.inputs.push_back(std::move(x));
    tape.pre.push_back(std::move(z));
    x = std::move(a);
  }
  tape.output = std::move(x);
  return tape;
}

/// Reverse pass for loss = sum(upstream .* output). Parameter gradients are
/// summed over the batch columns.
template <typename Scalar, typename Derived>
MlpGradients<Scalar> mlp_backward(const MlpSpec& spec, const MlpParams<Scalar>& params, const MlpTape<Scalar>& tape,
                                  const Eigen::MatrixBase<Derived>& upstream) {
  detail::check_tape(spec, params, tape, upstream.rows(), upstream.cols());
  MlpGradients<Scalar> g;
  g.params.layers.resize(params.layers.size());
  MatrixX<Scalar> delta = upstream.template cast<Scalar>();
  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const MatrixX<Scalar>& activated = (l + 1 == spec.num_layers()) ? tape.output : tape.inputs[l + 1];
    detail::activation_backward(spec.activation(l), tape.pre[l], activated, delta);
    g.params.layers[l].weight.noalias() = delta * tape.inputs[l].transpose();
    g.params.layers[l].bias = delta.rowwise().sum();
    MatrixX<Scalar> next = params.layers[l].weight.transpose() * delta;
    delta = std::move(next);
  }
  g.input = std::move(delta);
  return g;
}

/// Same as mlp_backward but only the gradient with respect to the input.
template <typename Scalar, typename Derived>
MatrixX<Scalar> mlp_input_gradient(const MlpSpec& spec, const MlpParams<Scalar>& params, const MlpTape<Scalar>& tape,
                                   const Eigen::MatrixBase<Derived>& upstream) {
  detail::check_tape(spec, params, tape, upstream.rows(), upstream.cols());
  MatrixX<Scalar> delta = upstream.template cast<Scalar>();
  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const MatrixX<Scalar>& activated = (l + 1 == spec.num_layers()) ? tape.output : tape.inputs[l + 1];
    detail::activation_backward(spec.activation(l), tape.pre[l], activated, delta);
    MatrixX<Scalar> next = params.layers[l].weight.transpose() * delta;
    delta = std::move(next);
  }
  return delta;
}

/// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
/// entries whose true derivative is zero from dividing rounding noise by zero.
inline constexpr double kGradcheckFloor = 1e-6;

inline double gradcheck_relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradcheckFloor});
  return std::abs(analytic - numeric) / scale;
}

/// Worst relative error between mlp_backward and central differences of
/// c . output(input), with the projection c drawn from a fixed seed. Covers
/// every parameter and every input coordinate.
template <typename Scalar, typename Derived>
double finite_diff_gradcheck(const MlpSpec& spec, const MlpParams<Scalar>& params,
                             const Eigen::MatrixBase<Derived>& input, double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_gradcheck: h must be positive");
  MatrixX<Scalar> x = input.template cast<Scalar>();
  Rng proj_rng(0x5eed);
  MatrixX<Scalar> proj(spec.output_width(), x.cols());
  for (Eigen::Index j = 0; j < proj.cols(); ++j)
    for (Eigen::Index i = 0; i < proj.rows(); ++i) proj(i, j) = static_cast<Scalar>(proj_rng.uniform(-1.0, 1.0));

  auto objective = [&](const MlpParams<Scalar>& p, const MatrixX<Scalar>& in) -> double {
    return static_cast<double>(mlp_forward(spec, p, in).output.cwiseProduct(proj).sum());
  };

  const auto tape = mlp_forward(spec, params, x);
  const auto grads = mlp_backward(spec, params, tape, proj);

  double worst = 0.0;
  MlpParams<Scalar> probe = params;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& w = probe.layers[l].weight;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const Scalar saved = w.data()[k];
      w.data()[k] = saved + h;
      const double up = objective(probe, x);
      w.data()[k] = saved - h;
      const double down = objective(probe, x);
      w.data()[k] = saved;
      worst = std::max(worst, gradcheck_relative_error(grads.params.layers[l].weight.data()[k], (up - down) / (2 * h)));
    }
    auto& b = probe.layers[l].bias;
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      const Scalar saved = b[k];
      b[k] = saved + h;
      const double up = objective(probe, x);
      b[k] = saved - h;
      const double down = objective(probe, x);
      b[k] = saved;
      worst = std::max(worst, gradcheck_relative_error(grads.params.layers[l].bias[k], (up - down) / (2 * h)));
    }
  }
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const Scalar saved = x.data()[k];
    x.data()[k] = saved + h;
    const double up = objective(params, x);
    x.data()[k] = saved - h;
    const double down = objective(params, x);
    x.data()[k] = saved;
    worst = std::max(worst, gradcheck_relative_error(grads.input.data()[k], (up - down) / (2 * h)));
  }
  return worst;
}

}  // namespace pggan
