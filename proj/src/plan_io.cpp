#include <fstream>
#include <map>

#include "json.hpp"
#include "tfconv/container.hpp"
#include "tfconv/error.hpp"
#include "tfconv/plan.hpp"

namespace tfconv {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "tfconv-plan";
constexpr int kVersion = 1;

struct Entry {
  std::string role;
  const DenseTensor* tensor;
};

ordered_json spec_to_json(const ConvSpec& spec) {
  ordered_json j;
  j["in_channels"] = spec.in_channels;
  j["out_channels"] = spec.out_channels;
  j["kernel"] = spec.kernel;
  j["stride"] = spec.stride;
  j["padding"] = spec.padding;
  return j;
}

ConvSpec spec_from_json(const nlohmann::json& j) {
  ConvSpec spec;
  spec.in_channels = j.at("in_channels").get<std::size_t>();
  spec.out_channels = j.at("out_channels").get<std::size_t>();
  spec.kernel = j.at("kernel").get<std::vector<std::size_t>>();
  spec.stride = j.value("stride", std::vector<std::size_t>{});
  spec.padding = j.value("padding", std::vector<std::size_t>{});
  spec.validate();
  return spec;
}

ordered_json activation_to_json(const Activation& a) {
  ordered_json j;
  j["type"] = activation_name(a);
  if (const auto* p = std::get_if<PRelu>(&a)) j["slope"] = p->slope;
  if (const auto* bn = std::get_if<FrozenBatchNorm>(&a)) {
    j["mean"] = bn->mean;
    j["var"] = bn->var;
    j["scale"] = bn->scale;
    j["shift"] = bn->shift;
    j["eps"] = bn->eps;
  }
  return j;
}

Activation activation_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "relu") return Relu{};
  if (type == "prelu") return PRelu{j.at("slope").get<double>()};
  if (type == "batchnorm") {
    return FrozenBatchNorm{j.at("mean").get<std::vector<double>>(), j.at("var").get<std::vector<double>>(),
                           j.at("scale").get<std::vector<double>>(), j.at("shift").get<std::vector<double>>(),
                           j.value("eps", 1e-5)};
  }
  throw FormatError("unknown activation type '" + type + "'");
}

std::vector<Entry> entries_of(const FactorizedPlan& plan) {
  std::vector<Entry> out;
  auto add_cp = [&out](const CpConvLayer& l) {
    out.push_back({"U_T", &l.kruskal.factors[0]});
    out.push_back({"U_C", &l.kruskal.factors[1]});
    for (std::size_t m = 2; m < l.kruskal.factors.size(); ++m) {
      out.push_back({"U_K" + std::to_string(m - 2), &l.kruskal.factors[m]});
    }
  };
  if (const auto* cp = std::get_if<CpConvLayer>(&plan.layer)) {
    add_cp(*cp);
  } else if (const auto* ho = std::get_if<HoCpConvLayer>(&plan.layer)) {
    add_cp(ho->cp);
    if (ho->skip) out.push_back({"skip", &*ho->skip});
  } else if (const auto* tk = std::get_if<TuckerConvLayer>(&plan.layer)) {
    out.push_back({"down", &tk->down});
    out.push_back({"core", &tk->core});
    out.push_back({"up", &tk->up});
  } else if (const auto* v1 = std::get_if<MobileNetV1Block>(&plan.layer)) {
    out.push_back({"spatial", &v1->spatial});
    out.push_back({"pointwise", &v1->pointwise});
  } else if (const auto* v2 = std::get_if<MobileNetV2Block>(&plan.layer)) {
    out.push_back({"down", &v2->down});
    out.push_back({"spatial", &v2->spatial});
    out.push_back({"up", &v2->up});
  }
  return out;
}

}  // namespace

fs::path save_plan(const FactorizedPlan& plan, const fs::path& dir, const std::string& extra_json) {
  fs::create_directories(dir);
  ordered_json m;
  m["format"] = kFormat;
  m["version"] = kVersion;
  m["scheme"] = scheme_name(plan.scheme);
  m["spec"] = spec_to_json(plan.spec());
  m["ranks"] = plan.ranks();

  ordered_json factors = ordered_json::array();
  for (const auto& e : entries_of(plan)) {
    const std::string file = e.role + ".tensor";
    save_tensor(dir / file, *e.tensor);
    factors.push_back({{"role", e.role}, {"file", file}, {"shape", e.tensor->shape()}});
  }
  m["factors"] = factors;

  if (const auto* ho = std::get_if<HoCpConvLayer>(&plan.layer)) {
    ordered_json acts = ordered_json::array();
    for (const auto& stage : ho->activations) {
      ordered_json s = ordered_json::array();
      for (const auto& a : stage) s.push_back(activation_to_json(a));
      acts.push_back(s);
    }
    m["activations"] = acts;
  }

  ordered_json stages = ordered_json::array();
  for (const auto& s : plan.stages()) {
    stages.push_back({{"kind", stage_kind_name(s.kind)}, {"label", s.label}, {"params", s.params}, {"flops", s.flops}});
  }
  m["stages"] = stages;
  m["cost"] = {{"params", plan.cost.params},
               {"flops", plan.cost.flops},
               {"flop_convention", kFlopConvention},
               {"input", plan.input}};

  const auto extra = ordered_json::parse(extra_json);
  for (const auto& [key, value] : extra.items()) m[key] = value;

  const fs::path manifest = dir / "manifest.json";
  std::ofstream os(manifest);
  if (!os) throw FormatError("cannot write " + manifest.string());
  os << m.dump(2) << '\n';
  return manifest;
}

FactorizedPlan load_plan(const fs::path& manifest) {
  std::ifstream is(manifest);
  if (!is) throw FormatError("cannot open plan manifest " + manifest.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("plan manifest is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (m.value("format", std::string{}) != kFormat) throw FormatError("not a tfconv plan manifest");
    const Scheme scheme = parse_scheme(m.at("scheme").get<std::string>());
    const ConvSpec spec = spec_from_json(m.at("spec"));
    const fs::path base = manifest.parent_path();

    std::map<std::string, DenseTensor> by_role;
    for (const auto& f : m.at("factors")) {
      by_role.emplace(f.at("role").get<std::string>(), load_tensor(base / f.at("file").get<std::string>()));
    }
    auto take = [&](const std::string& role) {
      auto it = by_role.find(role);
      if (it == by_role.end()) throw FormatError("plan manifest lacks factor '" + role + "'");
      return it->second;
    };
    auto read_cp = [&]() {
      KruskalTensor k;
      k.factors.push_back(take("U_T"));
      k.factors.push_back(take("U_C"));
      for (std::size_t i = 0; i < spec.spatial_order(); ++i) k.factors.push_back(take("U_K" + std::to_string(i)));
      CpConvLayer l{std::move(k), spec};
      l.validate();
      return l;
    };

    PlanLayer layer;
    switch (scheme) {
      case Scheme::Cp: layer = read_cp(); break;
      case Scheme::HoCp: {
        HoCpConvLayer l{read_cp(), {}, {}};
        for (const auto& stage : m.value("activations", nlohmann::json::array())) {
          StageActivation s;
          for (const auto& a : stage) s.push_back(activation_from_json(a));
          l.activations.push_back(std::move(s));
        }
        if (by_role.count("skip")) l.skip = take("skip");
        l.validate();
        layer = std::move(l);
        break;
      }
      case Scheme::Tucker: {
        TuckerConvLayer l{take("down"), take("core"), take("up"), spec};
        l.validate();
        layer = std::move(l);
        break;
      }
      case Scheme::MobileNetV1: {
        MobileNetV1Block b{take("spatial"), take("pointwise"), spec};
        b.validate();
        layer = std::move(b);
        break;
      }
      case Scheme::MobileNetV2: {
        MobileNetV2Block b{take("down"), take("spatial"), take("up"), spec};
        b.validate();
        layer = std::move(b);
        break;
      }
    }
    std::vector<std::size_t> input;
    if (m.contains("cost")) input = m["cost"].value("input", std::vector<std::size_t>{});
    return make_plan(std::move(layer), std::move(input));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed plan manifest: " + std::string(e.what()));
  } catch (const DimensionError& e) {
    throw FormatError("inconsistent plan manifest: " + std::string(e.what()));
  }
}

}  // namespace tfconv
