#include "tfconv/plan.hpp"

#include <type_traits>

#include "tfconv/error.hpp"

namespace tfconv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class Layer>
auto& spec_ref(Layer& l) {
  if constexpr (std::is_same_v<std::remove_const_t<Layer>, HoCpConvLayer>) {
    return l.cp.spec;
  } else {
    return l.spec;
  }
}

ConvSpec& spec_of(PlanLayer& layer) {
  return std::visit([](auto& l) -> ConvSpec& { return spec_ref(l); }, layer);
}

}  // namespace

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Cp: return "cp";
    case Scheme::Tucker: return "tucker";
    case Scheme::MobileNetV1: return "mobilenet-v1";
    case Scheme::MobileNetV2: return "mobilenet-v2";
    case Scheme::HoCp: return "hocp";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (auto s : {Scheme::Cp, Scheme::Tucker, Scheme::MobileNetV1, Scheme::MobileNetV2, Scheme::HoCp}) {
    if (scheme_name(s) == name) return s;
  }
  throw PreconditionError("unknown scheme '" + name + "'; expected cp, tucker, mobilenet-v1, mobilenet-v2 or hocp");
}

Scheme scheme_of(const PlanLayer& layer) {
  return std::visit(overloaded{[](const CpConvLayer&) { return Scheme::Cp; },
                               [](const TuckerConvLayer&) { return Scheme::Tucker; },
                               [](const MobileNetV1Block&) { return Scheme::MobileNetV1; },
                               [](const MobileNetV2Block&) { return Scheme::MobileNetV2; },
                               [](const HoCpConvLayer&) { return Scheme::HoCp; }},
                    layer);
}

const ConvSpec& FactorizedPlan::spec() const {
  return std::visit([](const auto& l) -> const ConvSpec& { return spec_ref(l); }, layer);
}

std::vector<std::size_t> FactorizedPlan::ranks() const {
  return std::visit(overloaded{[](const CpConvLayer& l) { return std::vector<std::size_t>{l.rank()}; },
                               [](const TuckerConvLayer& l) {
                                 return std::vector<std::size_t>{l.core.extent(0), l.core.extent(1)};
                               },
                               [](const MobileNetV1Block& l) { return std::vector<std::size_t>{l.spec.in_channels}; },
                               [](const MobileNetV2Block& l) { return std::vector<std::size_t>{l.rank()}; },
                               [](const HoCpConvLayer& l) { return std::vector<std::size_t>{l.cp.rank()}; }},
                    layer);
}

CostReport layer_cost(const PlanLayer& layer, std::span<const std::size_t> input) {
  return std::visit(
      overloaded{[&](const CpConvLayer& l) { return hocp_cost(l.spec, l.rank(), input); },
                 [&](const TuckerConvLayer& l) {
                   return tucker_cost(l.spec, l.core.extent(0), l.core.extent(1), input);
                 },
                 [&](const MobileNetV1Block& l) { return mobilenet_v1_cost(l.spec, input); },
                 [&](const MobileNetV2Block& l) { return mobilenet_v2_cost(l.spec, l.rank(), input); },
                 [&](const HoCpConvLayer& l) {
                   HoCpCostOptions opts;
                   for (const auto& stage : l.activations) {
                     std::string label;
                     for (const auto& a : stage) label += (label.empty() ? "" : "+") + activation_name(a);
                     opts.activations.push_back(label);
                   }
                   opts.skip = l.skip.has_value();
                   return hocp_cost(l.cp.spec, l.cp.rank(), input, opts);
                 }},
      layer);
}

FactorizedPlan make_plan(PlanLayer layer, std::vector<std::size_t> input) {
  FactorizedPlan plan{scheme_of(layer), std::move(layer), std::move(input), {}};
  plan.cost = layer_cost(plan.layer, plan.input);
  return plan;
}

FactorizedPlan with_geometry(FactorizedPlan plan, std::vector<std::size_t> stride, std::vector<std::size_t> padding) {
  ConvSpec& spec = spec_of(plan.layer);
  spec.stride = std::move(stride);
  spec.padding = std::move(padding);
  spec.validate();
  plan.cost = layer_cost(plan.layer, plan.input);
  return plan;
}

DenseTensor execute(const FactorizedPlan& plan, const DenseTensor& x) {
  return std::visit(overloaded{[&](const CpConvLayer& l) { return cp_conv_forward(l, x); },
                               [&](const TuckerConvLayer& l) { return tucker_conv_forward(l, x); },
                               [&](const MobileNetV1Block& l) { return mobilenet_v1_forward(l, x); },
                               [&](const MobileNetV2Block& l) { return mobilenet_v2_forward(l, x); },
                               [&](const HoCpConvLayer& l) { return ho_cp_conv_forward(l, x); }},
                    plan.layer);
}

DenseTensor reconstruct_kernel(const FactorizedPlan& plan) {
  return std::visit([](const auto& l) { return dense_kernel(l); }, plan.layer);
}

}  // namespace tfconv
