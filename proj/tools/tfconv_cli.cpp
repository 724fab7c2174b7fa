// tfconv command-line tool.
//
// Exit codes: 0 ok, 1 verification failed, 2 input error (unreadable or
// malformed files, shape mismatches, bad command line), 3 parameter error
// (invalid ranks, stride, padding, tolerances).

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tfconv/container.hpp"
#include "tfconv/cost.hpp"
#include "tfconv/error.hpp"
#include "tfconv/pipeline.hpp"
#include "tfconv/plan.hpp"

namespace fs = std::filesystem;
using namespace tfconv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitParameter = 3;

// Thrown for bad numeric parameters; maps to exit 3.
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Thrown for unusable inputs; maps to exit 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw ParameterError(what + ": '" + item + "' is not an integer");
    }
    if (used != item.size()) throw ParameterError(what + ": '" + item + "' is not an integer");
    if (v < 0) throw ParameterError(what + ": negative value " + item);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::size_t> parse_ranks(const std::string& text) {
  auto ranks = parse_list(text, "--rank");
  if (ranks.empty()) throw ParameterError("--rank: no ranks given");
  for (auto r : ranks)
    if (r == 0) throw ParameterError("--rank: ranks must be >= 1, got " + text);
  return ranks;
}

void check_stride(const std::vector<std::size_t>& stride) {
  for (auto s : stride)
    if (s == 0) throw ParameterError("--stride: stride must be >= 1");
}

DenseTensor load_input(const std::string& path, const std::string& what) {
  try {
    return load_tensor(path);
  } catch (const std::exception& e) {
    throw InputError(what + " '" + path + "': " + e.what());
  }
}

FactorizedPlan load_input_plan(const std::string& path) {
  try {
    return load_plan(path);
  } catch (const std::exception& e) {
    throw InputError("plan '" + path + "': " + e.what());
  }
}

void check_activation(const DenseTensor& x, const ConvSpec& spec) {
  if (x.order() != spec.spatial_order() + 1) {
    throw InputError("input " + shape_to_string(x.shape()) + " has " + std::to_string(x.order() - 1) +
                     " spatial modes but the kernel has " + std::to_string(spec.spatial_order()));
  }
  if (x.extent(0) != spec.in_channels) {
    throw InputError("channel mismatch: input " + shape_to_string(x.shape()) + " has " +
                     std::to_string(x.extent(0)) + " channels, kernel expects " + std::to_string(spec.in_channels));
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---- decompose ----

struct DecomposeArgs {
  std::string input, scheme, rank, out;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::size_t max_iters = 500;
  std::size_t restarts = 3;
  std::size_t probes = 8;
  std::string stride, padding;
};

int run_decompose(const DecomposeArgs& a) {
  CompressOptions o;
  Scheme scheme;
  try {
    scheme = parse_scheme(a.scheme);
  } catch (const PreconditionError& e) {
    throw ParameterError(e.what());
  }
  if (!(a.scheme == "mobilenet-v1" && a.rank.empty())) o.ranks = parse_ranks(a.rank);
  if (!(a.tol >= 0.0)) throw ParameterError("--tol must be >= 0");
  if (a.max_iters == 0) throw ParameterError("--max-iters must be >= 1");
  if (a.probes == 0) throw ParameterError("--probes must be >= 1");
  o.seed = a.seed;
  o.tol = a.tol;
  o.max_iters = a.max_iters;
  o.restarts = a.restarts;
  o.probes = a.probes;
  o.stride = parse_list(a.stride, "--stride");
  o.padding = parse_list(a.padding, "--padding");
  check_stride(o.stride);

  const DenseTensor kernel = load_input(a.input, "kernel");
  if (kernel.order() < 3) {
    throw InputError("kernel " + shape_to_string(kernel.shape()) + " must be T x C x K_0 x ... (order >= 3)");
  }
  CompressionResult r;
  try {
    r = compress(kernel, scheme, o);
  } catch (const PreconditionError& e) {
    throw ParameterError(e.what());
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';

  nlohmann::ordered_json extra;
  extra["rel_error"] = r.kernel_rel_error;
  extra["output_rel_error"] = r.output_rel_error;
  extra["seed"] = a.seed;
  extra["params_regular"] = r.cost_before.params;
  const fs::path manifest = save_plan(r.plan, a.out, extra.dump());

  std::cout << "rel_error=" << fmt(r.kernel_rel_error) << '\n';
  std::cout << "output_rel_error=" << fmt(r.output_rel_error) << '\n';
  std::cout << "params_regular=" << r.cost_before.params << '\n';
  std::cout << "params_factorized=" << r.cost_after.params << '\n';
  std::cout << "manifest=" << manifest.string() << '\n';
  return kExitOk;
}

// ---- conv ----

struct ConvArgs {
  std::string input, kernel, plan, out, stride, padding;
};

int run_conv(const ConvArgs& a) {
  if (a.kernel.empty() && a.plan.empty()) throw InputError("conv needs --kernel or --plan");
  const auto stride = parse_list(a.stride, "--stride");
  const auto padding = parse_list(a.padding, "--padding");
  check_stride(stride);

  const DenseTensor x = load_input(a.input, "input");
  DenseTensor y;
  if (a.plan.empty()) {
    const DenseTensor w = load_input(a.kernel, "kernel");
    if (w.order() < 3) throw InputError("kernel " + shape_to_string(w.shape()) + " must have order >= 3");
    ConvSpec spec;
    try {
      spec = ConvSpec::for_kernel(w, stride, padding);
    } catch (const std::invalid_argument& e) {
      throw ParameterError(e.what());
    }
    check_activation(x, spec);
    y = conv_nd_direct(x, w, spec);
  } else {
    FactorizedPlan plan = load_input_plan(a.plan);
    if (!a.kernel.empty()) {
      const DenseTensor w = load_input(a.kernel, "kernel");
      const ConvSpec& s = plan.spec();
      Shape expect{s.out_channels, s.in_channels};
      expect.insert(expect.end(), s.kernel.begin(), s.kernel.end());
      if (w.shape() != expect) {
        throw InputError("kernel " + shape_to_string(w.shape()) + " does not match plan kernel " +
                         shape_to_string(expect));
      }
    }
    try {
      plan = with_geometry(std::move(plan), stride, padding);
    } catch (const std::invalid_argument& e) {
      throw ParameterError(e.what());
    }
    check_activation(x, plan.spec());
    y = execute(plan, x);
  }
  save_tensor(a.out, y);
  std::cout << "shape=" << shape_to_string(y.shape()) << '\n';
  std::cout << "out=" << a.out << '\n';
  return kExitOk;
}

// ---- cost ----

nlohmann::json read_json_arg(const std::string& text) {
  try {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) return nlohmann::json::parse(text);
    std::ifstream is(text);
    if (!is) throw InputError("cannot open spec file '" + text + "'");
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("spec is not valid JSON: " + std::string(e.what()));
  }
}

// {"preset": "jester"} or
// {"layers": [{"in_channels", "out_channels", "kernel", "input"?, "stride"?,
//   "padding"?, "rank"?}], "rank_multiplier"?: 6, "skip"?: false}
std::vector<NetworkLayer> network_from_json(const nlohmann::json& j, std::uint64_t rank_override) {
  std::vector<NetworkLayer> layers;
  try {
    if (j.is_object() && j.contains("preset")) {
      const auto preset = j.at("preset").get<std::string>();
      if (preset != "jester") throw InputError("unknown preset '" + preset + "'; expected jester");
      layers = jester_architecture();
    } else {
      const nlohmann::json& list = j.is_array() ? j : j.at("layers");
      const std::uint64_t multiplier = j.is_object() ? j.value("rank_multiplier", std::uint64_t{6}) : 6;
      for (const auto& l : list) {
        NetworkLayer n;
        n.spec.in_channels = l.at("in_channels").get<std::size_t>();
        n.spec.out_channels = l.at("out_channels").get<std::size_t>();
        n.spec.kernel = l.at("kernel").get<std::vector<std::size_t>>();
        n.spec.stride = l.value("stride", std::vector<std::size_t>{});
        n.spec.padding = l.value("padding", std::vector<std::size_t>{});
        n.input = l.value("input", std::vector<std::size_t>{});
        n.rank = l.value("rank", multiplier * n.spec.in_channels);
        try {
          n.spec.validate();
        } catch (const std::invalid_argument& e) {
          throw ParameterError(e.what());
        }
        layers.push_back(std::move(n));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed cost spec: " + std::string(e.what()));
  }
  if (rank_override > 0) {
    for (auto& l : layers) l.rank = rank_override;
  }
  for (const auto& l : layers)
    if (l.rank == 0) throw ParameterError("rank must be >= 1");
  return layers;
}

int run_cost(const std::string& spec_text, std::uint64_t rank, bool skip_flag) {
  const nlohmann::json j = read_json_arg(spec_text);
  const bool skip = skip_flag || (j.is_object() && j.value("skip", false));
  const auto layers = network_from_json(j, rank);
  NetworkCost c;
  try {
    c = network_cost(layers, skip);
  } catch (const std::invalid_argument& e) {
    throw ParameterError(e.what());
  }
  std::cout << "flop_convention=" << kFlopConvention << '\n';
  std::cout << "layers=" << layers.size() << '\n';
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    std::cout << p << "rank=" << layers[i].rank << '\n';
    std::cout << p << "params_regular=" << c.regular[i].params << '\n';
    std::cout << p << "params_hocp=" << c.hocp[i].params << '\n';
    std::cout << p << "flops_regular=" << c.regular[i].flops << '\n';
    std::cout << p << "flops_hocp=" << c.hocp[i].flops << '\n';
    for (std::size_t s = 0; s < c.hocp[i].stages.size(); ++s) {
      const auto& st = c.hocp[i].stages[s];
      std::cout << p << "stage" << s << '=' << stage_kind_name(st.kind) << ',' << st.label << ",params=" << st.params
                << ",flops=" << st.flops << '\n';
    }
  }
  std::cout << "params_regular=" << c.params_regular << '\n';
  std::cout << "params_hocp=" << c.params_hocp << '\n';
  std::cout << "params_skip=" << c.params_skip << '\n';
  std::cout << "params_hocp_with_skip=" << c.params_hocp + c.params_skip << '\n';
  std::cout << "params_saved=" << static_cast<long long>(c.params_regular) - static_cast<long long>(c.params_hocp)
            << '\n';
  std::cout << "flops_regular=" << c.flops_regular << '\n';
  std::cout << "flops_hocp=" << c.flops_hocp << '\n';
  return kExitOk;
}

// ---- sweep ----

std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto x = item.find('x');
    if (x == std::string::npos) throw ParameterError("--pairs: expected CxT items, got '" + item + "'");
    const auto c = parse_list(item.substr(0, x), "--pairs");
    const auto t = parse_list(item.substr(x + 1), "--pairs");
    if (c.size() != 1 || t.size() != 1 || c[0] == 0 || t[0] == 0) {
      throw ParameterError("--pairs: expected positive CxT items, got '" + item + "'");
    }
    pairs.emplace_back(c[0], t[0]);
  }
  return pairs;
}

struct SweepArgs {
  bool fig6 = false;
  std::string multipliers = "3,6";
  std::string pairs;
  bool pairs_given = false;
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  if (!a.fig6 && !a.pairs_given) throw ParameterError("sweep needs --fig6 or --pairs");
  SweepConfig config;
  config.multipliers = parse_list(a.multipliers, "--multipliers");
  for (auto m : config.multipliers)
    if (m == 0) throw ParameterError("--multipliers: values must be >= 1");
  config.pairs = a.pairs_given ? parse_pairs(a.pairs) : figure6_default_pairs();
  const auto rows = figure6_sweep(config);
  if (a.out.empty() || a.out == "-") {
    write_sweep_csv(std::cout, rows, config.multipliers);
  } else {
    std::ofstream os(a.out);
    if (!os) throw InputError("cannot write '" + a.out + "'");
    write_sweep_csv(os, rows, config.multipliers);
    std::cout << "rows=" << rows.size() << '\n';
    std::cout << "out=" << a.out << '\n';
  }
  return kExitOk;
}

// ---- verify ----

struct VerifyArgs {
  std::string plan, kernel;
  double tol = 1e-8;
  std::size_t probes = 8;
  std::uint64_t seed = 0;
  std::size_t probe_extent = 16;
};

int run_verify(const VerifyArgs& a) {
  if (!(a.tol >= 0.0)) throw ParameterError("--tol must be >= 0");
  if (a.probes == 0) throw ParameterError("--probes must be >= 1");
  const FactorizedPlan plan = load_input_plan(a.plan);
  const DenseTensor kernel = load_input(a.kernel, "kernel");
  const ConvSpec& s = plan.spec();
  Shape expect{s.out_channels, s.in_channels};
  expect.insert(expect.end(), s.kernel.begin(), s.kernel.end());
  if (kernel.shape() != expect) {
    throw InputError("kernel " + shape_to_string(kernel.shape()) + " does not match plan kernel " +
                     shape_to_string(expect));
  }
  const auto rep = verify_equivalence(plan, kernel, a.tol, a.probes, a.seed, a.probe_extent);
  std::cout << "status=" << (rep.passed ? "pass" : "fail") << '\n';
  std::cout << "max_rel_dev=" << fmt(rep.worst_deviation) << '\n';
  std::cout << "worst_probe_seed=" << rep.worst_probe_seed << '\n';
  std::cout << "probes=" << a.probes << '\n';
  return rep.passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factorized N-D convolution toolkit"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* decompose = app.add_subcommand("decompose", "Factorize a T x C x K... kernel into a plan directory");
  decompose->add_option("--input", dec.input, "Kernel tensor file")->required();
  decompose->add_option("--scheme", dec.scheme, "cp | tucker | hocp | mobilenet-v1 | mobilenet-v2")->required();
  decompose->add_option("--rank", dec.rank, "Rank or comma-separated ranks");
  decompose->add_option("--out", dec.out, "Output plan directory")->required();
  decompose->add_option("--seed", dec.seed, "Random seed");
  decompose->add_option("--tol", dec.tol, "ALS / HOOI convergence tolerance");
  decompose->add_option("--max-iters", dec.max_iters, "Iteration cap");
  decompose->add_option("--restarts", dec.restarts, "ALS restarts (best kept)");
  decompose->add_option("--probes", dec.probes, "Probe activations for the output error");
  decompose->add_option("--stride", dec.stride, "Stride stored in the plan (int or list)");
  decompose->add_option("--padding", dec.padding, "Padding stored in the plan (int or list)");

  ConvArgs conv;
  auto* conv_cmd = app.add_subcommand("conv", "Run a convolution, directly or through a plan");
  conv_cmd->add_option("--input", conv.input, "Activation tensor C x D...")->required();
  conv_cmd->add_option("--kernel", conv.kernel, "Dense kernel tensor");
  conv_cmd->add_option("--plan", conv.plan, "Plan manifest.json");
  conv_cmd->add_option("--stride", conv.stride, "Stride (int or list)")->default_val("1");
  conv_cmd->add_option("--padding", conv.padding, "Padding (int or list)")->default_val("0");
  conv_cmd->add_option("--out", conv.out, "Output tensor file")->required();

  std::string cost_spec;
  std::uint64_t cost_rank = 0;
  bool cost_skip = false;
  auto* cost = app.add_subcommand("cost", "Parameter and FLOP counts for a network spec");
  cost->add_option("--spec", cost_spec, "JSON text or file")->required();
  cost->add_option("--rank", cost_rank, "Rank for every layer (default 6 x input channels)");
  cost->add_flag("--skip", cost_skip, "Include skip connections");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Regular vs HO-CP FLOPs over channel pairs");
  sweep->add_flag("--fig6", sw.fig6, "Default 32x32x16 input, 3x3x3 kernel sweep");
  sweep->add_option("--multipliers", sw.multipliers, "Rank multipliers");
  auto* pairs_opt = sweep->add_option("--pairs", sw.pairs, "Channel pairs CxT,CxT,... (may be empty)");
  sweep->add_option("--out", sw.out, "CSV path (default stdout)");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Check a plan against the dense kernel on random probes");
  verify->add_option("--plan", ver.plan, "Plan manifest.json")->required();
  verify->add_option("--kernel", ver.kernel, "Dense kernel tensor")->required();
  verify->add_option("--tol", ver.tol, "Maximum relative deviation");
  verify->add_option("--probes", ver.probes, "Number of probes");
  verify->add_option("--seed", ver.seed, "Seed of the first probe");
  verify->add_option("--probe-extent", ver.probe_extent, "Spatial extent of probes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*decompose) return run_decompose(dec);
    if (*conv_cmd) return run_conv(conv);
    if (*cost) return run_cost(cost_spec, cost_rank, cost_skip);
    if (*sweep) {
      sw.pairs_given = pairs_opt->count() > 0;
      return run_sweep(sw);
    }
    if (*verify) return run_verify(ver);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
