#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "pggan/mlp.hpp"

namespace pggan {

struct AdamHyper {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps_stability = 1e-8;

  friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

template <typename Scalar>
struct AdamState {
  MlpParams<Scalar> first_moment;
  MlpParams<Scalar> second_moment;
  std::uint64_t step_count = 0;
  AdamHyper hyper;

  static AdamState fresh(const MlpParams<Scalar>& params, const AdamHyper& hyper = {}) {
    return AdamState{params.zeros_like(), params.zeros_like(), 0, hyper};
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Bias-corrected Adam update, in place. Gradients are validated before
/// anything is touched, so a rejected step leaves params and state intact.
template <typename Scalar>
void adam_step(MlpParams<Scalar>& params, const MlpParams<Scalar>& grads, AdamState<Scalar>& state) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment) || !params.same_shape(state.second_moment))
    throw std::invalid_argument("adam_step: parameter, gradient and moment shapes disagree");
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    if (!grads.layers[l].weight.allFinite())
      throw std::invalid_argument("adam_step: non-finite gradient in layer " + std::to_string(l) + " weight");
    if (!grads.layers[l].bias.allFinite())
      throw std::invalid_argument("adam_step: non-finite gradient in layer " + std::to_string(l) + " bias");
  }

  const AdamHyper& h = state.hyper;
  ++state.step_count;
  const auto t = static_cast<double>(state.step_count);
  const Scalar b1 = static_cast<Scalar>(h.beta1);
  const Scalar b2 = static_cast<Scalar>(h.beta2);
  const Scalar correction1 = static_cast<Scalar>(1.0 - std::pow(h.beta1, t));
  const Scalar correction2 = static_cast<Scalar>(1.0 - std::pow(h.beta2, t));
  const Scalar lr = static_cast<Scalar>(h.learning_rate);
  const Scalar eps = static_cast<Scalar>(h.eps_stability);

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
    p.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grads.layers[l].weight, state.first_moment.layers[l].weight,
           state.second_moment.layers[l].weight);
    update(params.layers[l].bias, grads.layers[l].bias, state.first_moment.layers[l].bias,
           state.second_moment.layers[l].bias);
  }
}

}  // namespace pggan
