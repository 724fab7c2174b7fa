#include "tfconv/activation.hpp"

#include <cmath>

#include "tfconv/error.hpp"

namespace tfconv {

namespace {

void check_entries(const std::vector<double>& v, std::size_t channels, const char* name) {
  if (v.size() != 1 && v.size() != channels) {
    throw DimensionError(std::string("batch-norm ") + name + " has " + std::to_string(v.size()) + " entries for " +
                         std::to_string(channels) + " channels");
  }
}

double channel_value(const std::vector<double>& v, std::size_t c) { return v.size() == 1 ? v.front() : v[c]; }

}  // namespace

void apply_activation(DenseTensor& h, const Activation& act) {
  auto d = h.data();
  if (std::holds_alternative<Relu>(act)) {
    for (double& v : d) v = v > 0.0 ? v : 0.0;
  } else if (const auto* p = std::get_if<PRelu>(&act)) {
    for (double& v : d) v = v > 0.0 ? v : p->slope * v;
  } else {
    const auto& bn = std::get<FrozenBatchNorm>(act);
    const std::size_t channels = h.extent(0);
    const std::size_t per_channel = h.size() / channels;
    check_entries(bn.mean, channels, "mean");
    check_entries(bn.var, channels, "var");
    check_entries(bn.scale, channels, "scale");
    check_entries(bn.shift, channels, "shift");
    for (std::size_t c = 0; c < channels; ++c) {
      const double mean = channel_value(bn.mean, c);
      const double inv_std = 1.0 / std::sqrt(channel_value(bn.var, c) + bn.eps);
      const double scale = channel_value(bn.scale, c);
      const double shift = channel_value(bn.shift, c);
      for (std::size_t i = 0; i < per_channel; ++i) {
        double& v = d[c * per_channel + i];
        v = scale * (v - mean) * inv_std + shift;
      }
    }
  }
}

void apply_stage(DenseTensor& h, const StageActivation& stage) {
  for (const auto& act : stage) apply_activation(h, act);
}

std::string activation_name(const Activation& act) {
  if (std::holds_alternative<Relu>(act)) return "relu";
  if (std::holds_alternative<PRelu>(act)) return "prelu";
  return "batchnorm";
}

}  // namespace tfconv
