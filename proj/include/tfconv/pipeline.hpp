#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tfconv/cost.hpp"
#include "tfconv/plan.hpp"

namespace tfconv {

struct CompressOptions {
  // cp / hocp / mobilenet-v2: {R}. mobilenet-v1: {} or {C}.
  // tucker: {R_0, R_1} (spatial modes kept whole) or one rank per kernel mode.
  std::vector<std::size_t> ranks;
  std::size_t probes = 8;
  // Spatial extent of probe activations per mode (raised to the kernel
  // extent when smaller).
  std::size_t probe_extent = 16;
  std::uint64_t seed = 0;
  // Independent ALS restarts; the best is kept.
  std::size_t restarts = 3;
  std::size_t max_iters = 500;
  double tol = 1e-8;
  std::vector<std::size_t> stride;
  std::vector<std::size_t> padding;
};

struct CompressionResult {
  FactorizedPlan plan;
  double kernel_rel_error = 0.0;
  // Worst relative deviation of plan vs direct convolution over the probes.
  double output_rel_error = 0.0;
  CostReport cost_before;
  CostReport cost_after;
  std::vector<std::string> warnings;
};

CompressionResult compress(const DenseTensor& kernel, Scheme scheme, const CompressOptions& options);

// CP (or HO-CP) compression at increasing ranks. Each rank also tries the
// previous solution extended by one small extra component, and never reports
// a kernel error above the previous rank's.
std::vector<CompressionResult> compress_rank_sweep(const DenseTensor& kernel, Scheme scheme,
                                                   const std::vector<std::size_t>& ranks,
                                                   const CompressOptions& options);

struct EquivalenceReport {
  bool passed = false;
  double worst_deviation = 0.0;
  std::uint64_t worst_probe_seed = 0;
  std::vector<double> deviations;
};

// Seed of probe i is seed + i; probes are standard normal C x D... tensors.
DenseTensor make_probe(const ConvSpec& spec, std::size_t extent, std::uint64_t seed);

// Runs the plan and conv_nd_direct(kernel) on identical probes.
EquivalenceReport verify_equivalence(const FactorizedPlan& plan, const DenseTensor& kernel, double tolerance,
                                     std::size_t probes = 8, std::uint64_t seed = 0, std::size_t probe_extent = 16);

}  // namespace tfconv
