#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "tfconv/cost.hpp"
#include "tfconv/layers.hpp"

namespace tfconv {

enum class Scheme { Cp, Tucker, MobileNetV1, MobileNetV2, HoCp };

std::string scheme_name(Scheme scheme);
// Accepts cp | tucker | mobilenet-v1 | mobilenet-v2 | hocp.
Scheme parse_scheme(const std::string& name);

using PlanLayer = std::variant<CpConvLayer, TuckerConvLayer, MobileNetV1Block, MobileNetV2Block, HoCpConvLayer>;

// A factorized convolution together with its stage-by-stage cost. FLOPs in
// the stage list refer to `input` (spatial extents); they are zero when no
// input extents were given.
struct FactorizedPlan {
  Scheme scheme = Scheme::Cp;
  PlanLayer layer;
  std::vector<std::size_t> input;
  CostReport cost;

  const ConvSpec& spec() const;
  const std::vector<CostStage>& stages() const { return cost.stages; }
  // CP rank, Tucker (R_0, R_1) or MobileNet-v2 rank; C for MobileNet-v1.
  std::vector<std::size_t> ranks() const;
};

Scheme scheme_of(const PlanLayer& layer);
CostReport layer_cost(const PlanLayer& layer, std::span<const std::size_t> input);
FactorizedPlan make_plan(PlanLayer layer, std::vector<std::size_t> input = {});

// Same factors, different stride / padding.
FactorizedPlan with_geometry(FactorizedPlan plan, std::vector<std::size_t> stride, std::vector<std::size_t> padding);

DenseTensor execute(const FactorizedPlan& plan, const DenseTensor& x);
// Dense T x C x K... kernel the plan implements (activations and skip ignored).
DenseTensor reconstruct_kernel(const FactorizedPlan& plan);

// Plan directory layout: manifest.json plus one tensor container per factor.
// `extra` is merged into the manifest's top-level object (e.g. error metrics).
std::filesystem::path save_plan(const FactorizedPlan& plan, const std::filesystem::path& dir,
                                const std::string& extra_json = "{}");
FactorizedPlan load_plan(const std::filesystem::path& manifest);

}  // namespace tfconv
