#include <gtest/gtest.h>

#include <sstream>

#include "flop_counter.hpp"
#include "test_util.hpp"
#include "tfconv/cost.hpp"
#include "tfconv/layers.hpp"

using namespace tfconv;
using tfconv::testing::activation_shape;
using tfconv::testing::kernel_shape;
using tfconv::testing::random_config;
using tfconv::testing::random_kruskal;
using tfconv::testing::rng_for;

TEST(Params, Regular) {
  EXPECT_EQ(params_regular(ConvSpec{3, 64, {3, 3, 3}, {}, {}}), 5184u);
  EXPECT_EQ(params_regular(ConvSpec{1, 1, {1}, {}, {}}), 1u);
}

TEST(Params, HoCp) {
  EXPECT_EQ(params_hocp(ConvSpec{3, 64, {3, 3, 3}, {}, {}}, 18), 1368u);
  EXPECT_EQ(params_hocp(ConvSpec{3, 64, {3, 3, 3}, {}, {}}, 0), 0u);
}

TEST(Params, OtherSchemes) {
  const ConvSpec spec{4, 6, {3, 3}, {}, {}};
  EXPECT_EQ(params_tucker(spec, 2, 3), 3u * 4 + 2 * 3 * 9 + 6 * 2);
  EXPECT_EQ(params_mobilenet_v1(spec), 9u * 4 + 6 * 4);
  EXPECT_EQ(params_mobilenet_v2(spec, 24), 24u * (4 + 9 + 6));
  EXPECT_EQ(params_skip(spec), 24u);
}

TEST(Params, BreakEvenRule) {
  auto rng = rng_for(1);
  std::uniform_int_distribution<std::size_t> ch(1, 64), ke(1, 5), rk(1, 400);
  for (int trial = 0; trial < 500; ++trial) {
    const ConvSpec spec{ch(rng), ch(rng), {ke(rng), ke(rng), ke(rng)}, {}, {}};
    const std::uint64_t r = rk(rng);
    const double break_even = static_cast<double>(spec.in_channels * spec.out_channels * spec.kernel_volume()) /
                              static_cast<double>(spec.in_channels + spec.out_channels + spec.kernel_sum());
    if (static_cast<double>(r) < break_even) {
      EXPECT_LT(params_hocp(spec, r), params_regular(spec));
    } else {
      EXPECT_GE(params_hocp(spec, r), params_regular(spec));
    }
  }
}

TEST(Params, JesterTotals) {
  const auto net = jester_architecture();
  ASSERT_EQ(net.size(), 4u);
  const NetworkCost c = network_cost(net);
  EXPECT_EQ(c.params_regular, 2880576u);
  EXPECT_EQ(c.params_regular, 27u * (192 + 8192 + 32768 + 65536));
  EXPECT_EQ(c.params_hocp, 1180632u);
  EXPECT_EQ(c.params_regular - c.params_hocp, 1699944u);
  EXPECT_EQ(c.params_skip, 0u);

  const NetworkCost s = network_cost(net, true);
  EXPECT_EQ(s.params_hocp, 1180632u);
  EXPECT_EQ(s.params_skip, 3u * 64 + 64 * 128 + 128 * 256 + 256 * 256);
}

TEST(Flops, OneByOne) {
  const std::size_t in[] = {1};
  EXPECT_EQ(flops_regular(ConvSpec{1, 1, {1}, {}, {}}, in), 2u);
}

TEST(Flops, StageBreakdownAddsUp) {
  const ConvSpec spec{16, 32, {3, 3, 3}, {}, {1}};
  const std::size_t in[] = {32, 32, 16};
  HoCpCostOptions opts;
  opts.activations = {"relu", "", "prelu"};
  opts.skip = true;
  const CostReport r = hocp_cost(spec, 96, in, opts);
  std::uint64_t params = 0, flops = 0;
  for (const auto& s : r.stages) {
    params += s.params;
    flops += s.flops;
  }
  EXPECT_EQ(params, r.params);
  EXPECT_EQ(flops, r.flops);
  EXPECT_EQ(r.params, params_hocp(spec, 96) + params_skip(spec));
  EXPECT_EQ(r.stage_params(StageKind::Activation), 0u);
  std::size_t activations = 0;
  for (const auto& s : r.stages) activations += s.kind == StageKind::Activation;
  EXPECT_EQ(activations, 2u);
}

TEST(Flops, ParamsOnlyWithoutInput) {
  const ConvSpec spec{4, 4, {3}, {}, {}};
  const CostReport r = hocp_cost(spec, 8, {});
  EXPECT_EQ(r.flops, 0u);
  EXPECT_EQ(r.params, params_hocp(spec, 8));
}

TEST(Flops, CountingOracleRegular) {
  auto rng = rng_for(2);
  for (int trial = 0; trial < 15; ++trial) {
    const auto cfg = random_config(rng);
    const ConvSpec spec{cfg.c, cfg.t, cfg.kernel, cfg.stride, cfg.padding};
    const DenseTensor x = random_uniform(activation_shape(cfg.c, cfg.input), rng);
    const DenseTensor w = random_uniform(kernel_shape(cfg.t, cfg.c, cfg.kernel), rng);
    const auto counted = tfconv::testing::counted_regular_conv(x, w, spec);
    EXPECT_EQ(2 * counted.macs, flops_regular(spec, cfg.input));
    EXPECT_LT(relative_error(counted.output, conv_nd_direct(x, w, spec)), 1e-13);
  }
}

TEST(Flops, CountingOracleHoCpPerStage) {
  auto rng = rng_for(3);
  std::uniform_int_distribution<std::size_t> rk(1, 8);
  for (int trial = 0; trial < 15; ++trial) {
    const auto cfg = random_config(rng);
    const std::size_t rank = rk(rng);
    const KruskalTensor k = random_kruskal(kernel_shape(cfg.t, cfg.c, cfg.kernel), rank, rng);
    const CpConvLayer layer = CpConvLayer::from_kruskal(k, cfg.stride, cfg.padding);
    const DenseTensor x = random_uniform(activation_shape(cfg.c, cfg.input), rng);
    const auto counted = tfconv::testing::counted_hocp_conv(x, k, layer.spec);
    const CostReport report = hocp_cost(layer.spec, rank, cfg.input);
    ASSERT_EQ(report.stages.size(), counted.macs.size());
    std::uint64_t total = 0;
    for (std::size_t s = 0; s < counted.macs.size(); ++s) {
      EXPECT_EQ(2 * counted.macs[s], report.stages[s].flops) << report.stages[s].label;
      total += 2 * counted.macs[s];
    }
    EXPECT_EQ(total, flops_hocp(layer.spec, rank, cfg.input));
    EXPECT_LT(relative_error(counted.output, cp_conv_forward(layer, x)), 1e-12);
  }
}

TEST(Sweep, DefaultPairsHoCpBelowRegular) {
  SweepConfig cfg;
  cfg.pairs = figure6_default_pairs();
  const auto rows = figure6_sweep(cfg);
  ASSERT_EQ(rows.size(), cfg.pairs.size());
  for (const auto& r : rows) {
    ASSERT_EQ(r.gflops_hocp.size(), 2u);
    EXPECT_LT(r.gflops_hocp[0], r.gflops_hocp[1]);
    EXPECT_LT(r.gflops_hocp[1], r.gflops_regular);
    EXPECT_NEAR(r.gflops_hocp[1] / r.gflops_hocp[0], 2.0, 1e-9);
  }
}

TEST(Sweep, MonotoneInChannelProduct) {
  SweepConfig cfg;
  cfg.pairs = figure6_default_pairs();
  const auto rows = figure6_sweep(cfg);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_GE(rows[i].in_channels * rows[i].out_channels, rows[i - 1].in_channels * rows[i - 1].out_channels);
    EXPECT_GE(rows[i].gflops_regular, rows[i - 1].gflops_regular);
    for (std::size_t m = 0; m < 2; ++m) EXPECT_GE(rows[i].gflops_hocp[m], rows[i - 1].gflops_hocp[m]);
  }
}

TEST(Sweep, EmptyPairsGiveHeaderOnly) {
  SweepConfig cfg;
  const auto rows = figure6_sweep(cfg);
  EXPECT_TRUE(rows.empty());
  std::ostringstream os;
  write_sweep_csv(os, rows, cfg.multipliers);
  EXPECT_EQ(os.str(), "in_channels,out_channels,gflops_regular,gflops_hocp_x3,gflops_hocp_x6\n");
}

TEST(Sweep, CsvRows) {
  SweepConfig cfg;
  cfg.pairs = {{16, 16}};
  std::ostringstream os;
  write_sweep_csv(os, figure6_sweep(cfg), cfg.multipliers);
  // 2 * 16 * 16 * 27 * 32 * 32 * 16
  EXPECT_NE(os.str().find("\n16,16,0.226492416,"), std::string::npos);
}

TEST(StageKind, NamesRoundTrip) {
  for (auto k : {StageKind::ChannelContraction, StageKind::ModeConv1d, StageKind::DenseConv, StageKind::DepthwiseConv,
                 StageKind::Activation, StageKind::SkipAdd}) {
    EXPECT_EQ(stage_kind_from_name(stage_kind_name(k)), k);
  }
}
