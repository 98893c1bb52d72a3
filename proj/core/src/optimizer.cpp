#include "privbench/optimizer.hpp"

#include <cmath>
#include <string>

namespace privbench {

OptimizerState OptimizerState::make(OptimizerKind kind, double learning_rate,
                                    const MlpModel& model) {
  OptimizerState state;
  state.kind = kind;
  state.learning_rate = learning_rate;
  if (kind == OptimizerKind::kAdam) {
    state.first_moment = GradientRecord::zeros_like(model);
    state.second_moment = GradientRecord::zeros_like(model);
  }
  return state;
}

namespace {

void check_finite(const GradientRecord& grads) {
  for (std::size_t l = 0; l < grads.d_weights.size(); ++l) {
    if (!grads.d_weights[l].all_finite()) {
      throw NumericError("non-finite weight gradient in layer " + std::to_string(l));
    }
    for (double x : grads.d_biases[l]) {
      if (!std::isfinite(x)) {
        throw NumericError("non-finite bias gradient in layer " + std::to_string(l));
      }
    }
  }
}

}  // namespace

void optimizer_step(MlpModel& model, OptimizerState& state,
                    const GradientRecord& grads) {
  check_finite(grads);
  ++state.step_count;
  if (state.kind == OptimizerKind::kSgd) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      model.weights[l].add_scaled(grads.d_weights[l], -state.learning_rate);
      for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
        model.biases[l][i] -= state.learning_rate * grads.d_biases[l][i];
      }
    }
    return;
  }
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto update = [&](double& param, double g, double& m, double& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    param -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Matrix& w = model.weights[l];
    Matrix& m = state.first_moment.d_weights[l];
    Matrix& v = state.second_moment.d_weights[l];
    for (std::size_t i = 0; i < w.size(); ++i) {
      update(w.data()[i], grads.d_weights[l].data()[i], m.data()[i], v.data()[i]);
    }
    for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
      update(model.biases[l][i], grads.d_biases[l][i],
             state.first_moment.d_biases[l][i], state.second_moment.d_biases[l][i]);
    }
  }
}

}  // namespace privbench
