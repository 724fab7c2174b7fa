#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tfconv/tensor.hpp"

namespace tfconv {

struct Relu {};

struct PRelu {
  double slope = 0.25;
};

// Inference-mode batch normalisation along mode 0:
//   y = scale * (x - mean) / sqrt(var + eps) + shift
// Each vector holds one entry per channel, or a single entry used for all.
struct FrozenBatchNorm {
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> scale;
  std::vector<double> shift;
  double eps = 1e-5;
};

using Activation = std::variant<Relu, PRelu, FrozenBatchNorm>;

// Operators applied after one stage, in order. Empty means no activation.
using StageActivation = std::vector<Activation>;

void apply_activation(DenseTensor& h, const Activation& act);
void apply_stage(DenseTensor& h, const StageActivation& stage);

std::string activation_name(const Activation& act);

}  // namespace tfconv
