#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tfconv/conv.hpp"

namespace tfconv {

// All FLOP counts use multiply-add = 2 FLOPs. Padding taps are counted as
// if the zero padding were materialised. Bias terms do not exist; activation
// and batch-norm stages carry zero parameters and zero FLOPs.
inline constexpr const char* kFlopConvention = "multiply-add = 2 FLOPs";

enum class StageKind { ChannelContraction, ModeConv1d, DenseConv, DepthwiseConv, Activation, SkipAdd };

std::string stage_kind_name(StageKind kind);
StageKind stage_kind_from_name(const std::string& name);

struct CostStage {
  StageKind kind;
  std::string label;
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
};

struct CostReport {
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
  std::vector<CostStage> stages;

  void add(CostStage stage);
  std::uint64_t stage_params(StageKind kind) const;
};

std::uint64_t params_regular(const ConvSpec& spec);
std::uint64_t params_hocp(const ConvSpec& spec, std::uint64_t rank);
// Bottleneck with absorbed spatial factors: R_1 C + R_0 R_1 prod K + T R_0.
std::uint64_t params_tucker(const ConvSpec& spec, std::uint64_t rank_out, std::uint64_t rank_in);
std::uint64_t params_mobilenet_v1(const ConvSpec& spec);
std::uint64_t params_mobilenet_v2(const ConvSpec& spec, std::uint64_t rank);
std::uint64_t params_skip(const ConvSpec& spec);

std::uint64_t flops_regular(const ConvSpec& spec, std::span<const std::size_t> input);
std::uint64_t flops_hocp(const ConvSpec& spec, std::uint64_t rank, std::span<const std::size_t> input);

// Per-stage reports. An empty `input` yields parameter counts only (flops 0).
CostReport regular_cost(const ConvSpec& spec, std::span<const std::size_t> input);

struct HoCpCostOptions {
  // Label of the activation after each spatial stage; empty string or empty
  // vector for none.
  std::vector<std::string> activations;
  bool skip = false;
};
CostReport hocp_cost(const ConvSpec& spec, std::uint64_t rank, std::span<const std::size_t> input,
                     const HoCpCostOptions& options = {});
CostReport tucker_cost(const ConvSpec& spec, std::uint64_t rank_out, std::uint64_t rank_in,
                       std::span<const std::size_t> input);
CostReport mobilenet_v1_cost(const ConvSpec& spec, std::span<const std::size_t> input);
CostReport mobilenet_v2_cost(const ConvSpec& spec, std::uint64_t rank, std::span<const std::size_t> input);

// One convolution of a network, with the spatial extents it sees.
struct NetworkLayer {
  ConvSpec spec;
  std::vector<std::size_t> input;
  std::uint64_t rank = 0;
};

struct NetworkCost {
  std::vector<CostReport> regular;
  std::vector<CostReport> hocp;  // skip line included when requested
  std::uint64_t params_regular = 0;
  std::uint64_t params_hocp = 0;  // without skip factors
  std::uint64_t params_skip = 0;
  std::uint64_t flops_regular = 0;
  std::uint64_t flops_hocp = 0;
};

NetworkCost network_cost(std::span<const NetworkLayer> layers, bool with_skip = false);

// 3-D column of 4 convolutions (3->64, 64->128, 128->256, 256->256), 3x3x3
// kernels with same padding, rank 6 x input channels, on 18 x 84 x 84 clips
// with 2x2x2 pooling between blocks.
std::vector<NetworkLayer> jester_architecture();

struct SweepRow {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  double gflops_regular = 0.0;
  std::vector<double> gflops_hocp;  // one per multiplier
};

struct SweepConfig {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> input{32, 32, 16};
  std::vector<std::size_t> kernel{3, 3, 3};
  std::vector<std::size_t> padding{1};
  std::vector<std::size_t> multipliers{3, 6};
};

// Channel pairs plotted by default: (16,16) up to (512,512), doubling
// alternately the output and input channels.
std::vector<std::pair<std::size_t, std::size_t>> figure6_default_pairs();

// Rank for multiplier m is m * in_channels.
std::vector<SweepRow> figure6_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, std::span<const std::size_t> multipliers);

}  // namespace tfconv
