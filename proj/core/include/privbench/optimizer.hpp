#pragma once

#include <cstdint>

#include "privbench/mlp.hpp"

namespace privbench {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  GradientRecord first_moment;
  GradientRecord second_moment;

  static OptimizerState make(OptimizerKind kind, double learning_rate,
                             const MlpModel& model);
};

/// In-place parameter update. Throws NumericError naming the first layer with
/// a non-finite gradient entry.
void optimizer_step(MlpModel& model, OptimizerState& state,
                    const GradientRecord& grads);

}  // namespace privbench
