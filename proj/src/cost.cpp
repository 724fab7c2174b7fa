#include "tfconv/cost.hpp"

#include <charconv>
#include <ostream>
#include <string_view>

#include "tfconv/error.hpp"

namespace tfconv {

namespace {

constexpr std::uint64_t kFlopsPerMac = 2;

std::uint64_t volume(std::span<const std::size_t> extents) {
  std::uint64_t v = 1;
  for (auto e : extents) v *= e;
  return v;
}

std::vector<std::size_t> outputs_or_empty(const ConvSpec& spec, std::span<const std::size_t> input) {
  if (input.empty()) return {};
  return spec.output_extents(input);
}

}  // namespace

std::string stage_kind_name(StageKind kind) {
  switch (kind) {
    case StageKind::ChannelContraction: return "channel_contraction";
    case StageKind::ModeConv1d: return "mode_conv_1d";
    case StageKind::DenseConv: return "dense_conv";
    case StageKind::DepthwiseConv: return "depthwise_conv";
    case StageKind::Activation: return "activation";
    case StageKind::SkipAdd: return "skip_add";
  }
  return "unknown";
}

StageKind stage_kind_from_name(const std::string& name) {
  for (auto k : {StageKind::ChannelContraction, StageKind::ModeConv1d, StageKind::DenseConv,
                 StageKind::DepthwiseConv, StageKind::Activation, StageKind::SkipAdd}) {
    if (stage_kind_name(k) == name) return k;
  }
  throw FormatError("unknown stage kind '" + name + "'");
}

void CostReport::add(CostStage stage) {
  params += stage.params;
  flops += stage.flops;
  stages.push_back(std::move(stage));
}

std::uint64_t CostReport::stage_params(StageKind kind) const {
  std::uint64_t p = 0;
  for (const auto& s : stages)
    if (s.kind == kind) p += s.params;
  return p;
}

std::uint64_t params_regular(const ConvSpec& spec) {
  return static_cast<std::uint64_t>(spec.in_channels) * spec.out_channels * spec.kernel_volume();
}

std::uint64_t params_hocp(const ConvSpec& spec, std::uint64_t rank) {
  return rank * (spec.in_channels + spec.out_channels + spec.kernel_sum());
}

std::uint64_t params_tucker(const ConvSpec& spec, std::uint64_t rank_out, std::uint64_t rank_in) {
  return rank_in * spec.in_channels + rank_out * rank_in * spec.kernel_volume() + spec.out_channels * rank_out;
}

std::uint64_t params_mobilenet_v1(const ConvSpec& spec) {
  return static_cast<std::uint64_t>(spec.kernel_volume()) * spec.in_channels +
         static_cast<std::uint64_t>(spec.out_channels) * spec.in_channels;
}

std::uint64_t params_mobilenet_v2(const ConvSpec& spec, std::uint64_t rank) {
  return rank * (spec.in_channels + spec.kernel_volume() + spec.out_channels);
}

std::uint64_t params_skip(const ConvSpec& spec) {
  return static_cast<std::uint64_t>(spec.in_channels) * spec.out_channels;
}

std::uint64_t flops_regular(const ConvSpec& spec, std::span<const std::size_t> input) {
  return regular_cost(spec, input).flops;
}

std::uint64_t flops_hocp(const ConvSpec& spec, std::uint64_t rank, std::span<const std::size_t> input) {
  return hocp_cost(spec, rank, input).flops;
}

CostReport regular_cost(const ConvSpec& spec, std::span<const std::size_t> input) {
  spec.validate();
  const auto out = outputs_or_empty(spec, input);
  CostReport r;
  r.add({StageKind::DenseConv, "dense conv", params_regular(spec),
         input.empty() ? 0 : kFlopsPerMac * params_regular(spec) * volume(out)});
  return r;
}

CostReport hocp_cost(const ConvSpec& spec, std::uint64_t rank, std::span<const std::size_t> input,
                     const HoCpCostOptions& options) {
  spec.validate();
  const bool with_flops = !input.empty();
  const auto out = outputs_or_empty(spec, input);
  std::vector<std::size_t> current(input.begin(), input.end());
  const std::size_t n = spec.spatial_order();

  CostReport r;
  r.add({StageKind::ChannelContraction, "input contraction (U_C)", rank * spec.in_channels,
         with_flops ? kFlopsPerMac * spec.in_channels * rank * volume(current) : 0});
  for (std::size_t m = 0; m < n; ++m) {
    if (with_flops) current[m] = out[m];
    r.add({StageKind::ModeConv1d, "mode-" + std::to_string(m) + " grouped 1-D conv (U_K" + std::to_string(m) + ")",
           rank * spec.kernel[m], with_flops ? kFlopsPerMac * spec.kernel[m] * rank * volume(current) : 0});
    if (m < options.activations.size() && !options.activations[m].empty()) {
      r.add({StageKind::Activation, options.activations[m] + " after mode " + std::to_string(m), 0, 0});
    }
  }
  r.add({StageKind::ChannelContraction, "output projection (U_T)", rank * spec.out_channels,
         with_flops ? kFlopsPerMac * rank * spec.out_channels * volume(out) : 0});
  if (options.skip) {
    r.add({StageKind::SkipAdd, "skip factor", params_skip(spec),
           with_flops ? kFlopsPerMac * params_skip(spec) * volume(input) : 0});
  }
  return r;
}

CostReport tucker_cost(const ConvSpec& spec, std::uint64_t rank_out, std::uint64_t rank_in,
                       std::span<const std::size_t> input) {
  spec.validate();
  const bool with_flops = !input.empty();
  const auto out = outputs_or_empty(spec, input);
  CostReport r;
  r.add({StageKind::ChannelContraction, "down-projection", rank_in * spec.in_channels,
         with_flops ? kFlopsPerMac * rank_in * spec.in_channels * volume(input) : 0});
  const std::uint64_t core = rank_out * rank_in * spec.kernel_volume();
  r.add({StageKind::DenseConv, "core conv", core, with_flops ? kFlopsPerMac * core * volume(out) : 0});
  r.add({StageKind::ChannelContraction, "up-projection", spec.out_channels * rank_out,
         with_flops ? kFlopsPerMac * spec.out_channels * rank_out * volume(out) : 0});
  return r;
}

CostReport mobilenet_v1_cost(const ConvSpec& spec, std::span<const std::size_t> input) {
  spec.validate();
  const bool with_flops = !input.empty();
  const auto out = outputs_or_empty(spec, input);
  const std::uint64_t dw = static_cast<std::uint64_t>(spec.kernel_volume()) * spec.in_channels;
  const std::uint64_t pw = static_cast<std::uint64_t>(spec.out_channels) * spec.in_channels;
  CostReport r;
  r.add({StageKind::DepthwiseConv, "depthwise conv", dw, with_flops ? kFlopsPerMac * dw * volume(out) : 0});
  r.add({StageKind::ChannelContraction, "pointwise conv", pw, with_flops ? kFlopsPerMac * pw * volume(out) : 0});
  return r;
}

CostReport mobilenet_v2_cost(const ConvSpec& spec, std::uint64_t rank, std::span<const std::size_t> input) {
  spec.validate();
  const bool with_flops = !input.empty();
  const auto out = outputs_or_empty(spec, input);
  const std::uint64_t down = rank * spec.in_channels;
  const std::uint64_t dw = rank * spec.kernel_volume();
  const std::uint64_t up = rank * spec.out_channels;
  CostReport r;
  r.add({StageKind::ChannelContraction, "expansion", down, with_flops ? kFlopsPerMac * down * volume(input) : 0});
  r.add({StageKind::DepthwiseConv, "depthwise conv", dw, with_flops ? kFlopsPerMac * dw * volume(out) : 0});
  r.add({StageKind::ChannelContraction, "projection", up, with_flops ? kFlopsPerMac * up * volume(out) : 0});
  return r;
}

NetworkCost network_cost(std::span<const NetworkLayer> layers, bool with_skip) {
  NetworkCost nc;
  for (const auto& l : layers) {
    const auto reg = regular_cost(l.spec, l.input);
    HoCpCostOptions opts;
    opts.skip = with_skip;
    const auto ho = hocp_cost(l.spec, l.rank, l.input, opts);
    nc.params_regular += reg.params;
    nc.params_hocp += params_hocp(l.spec, l.rank);
    nc.params_skip += with_skip ? params_skip(l.spec) : 0;
    nc.flops_regular += reg.flops;
    nc.flops_hocp += ho.flops;
    nc.regular.push_back(reg);
    nc.hocp.push_back(ho);
  }
  return nc;
}

std::vector<NetworkLayer> jester_architecture() {
  const std::pair<std::size_t, std::size_t> channels[] = {{3, 64}, {64, 128}, {128, 256}, {256, 256}};
  std::vector<std::size_t> extents{18, 84, 84};
  std::vector<NetworkLayer> layers;
  for (const auto& [c, t] : channels) {
    layers.push_back({ConvSpec{c, t, {3, 3, 3}, {1}, {1}}, extents, 6 * c});
    for (auto& e : extents) e /= 2;
  }
  return layers;
}

std::vector<std::pair<std::size_t, std::size_t>> figure6_default_pairs() {
  return {{16, 16},   {16, 32},   {32, 32},   {32, 64},   {64, 64},  {64, 128},
          {128, 128}, {128, 256}, {256, 256}, {256, 512}, {512, 512}};
}

std::vector<SweepRow> figure6_sweep(const SweepConfig& config) {
  std::vector<SweepRow> rows;
  for (const auto& [c, t] : config.pairs) {
    const ConvSpec spec{c, t, config.kernel, {1}, config.padding};
    SweepRow row{c, t, static_cast<double>(flops_regular(spec, config.input)) / 1e9, {}};
    for (auto m : config.multipliers) {
      row.gflops_hocp.push_back(static_cast<double>(flops_hocp(spec, m * c, config.input)) / 1e9);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, std::span<const std::size_t> multipliers) {
  os << "in_channels,out_channels,gflops_regular";
  for (auto m : multipliers) os << ",gflops_hocp_x" << m;
  os << '\n';
  // Shortest representation that round-trips.
  auto put = [&os](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    os << ',' << std::string_view(buf, res.ptr - buf);
  };
  for (const auto& r : rows) {
    os << r.in_channels << ',' << r.out_channels;
    put(r.gflops_regular);
    for (double g : r.gflops_hocp) put(g);
    os << '\n';
  }
}

}  // namespace tfconv
