// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "flop_counter.hpp"
#include "test_util.hpp"
#include "tfconv/container.hpp"
#include "tfconv/cost.hpp"
#include "tfconv/decomp.hpp"
#include "tfconv/layers.hpp"

using namespace tfconv;
using namespace tfconv::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// 1. Five factorized forwards vs the direct convolution of their kernel.
Outcome oracle_equivalence() {
  constexpr int kConfigs = 200;
  constexpr double kTol = 1e-10;
  constexpr double kBudget = 120.0;
  const auto start = Clock::now();
  auto rng = rng_for(20240601);
  std::uniform_int_distribution<std::size_t> rank_dist(1, 8);
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < kConfigs; ++i) {
    const auto cfg = random_config(rng);
    const Shape kshape = kernel_shape(cfg.t, cfg.c, cfg.kernel);
    const DenseTensor x = random_uniform(activation_shape(cfg.c, cfg.input), rng);
    std::vector<double> devs;

    const KruskalTensor k = random_kruskal(kshape, rank_dist(rng), rng);
    const CpConvLayer cp = CpConvLayer::from_kruskal(k, cfg.stride, cfg.padding);
    const DenseTensor ref = conv_nd_direct(x, dense_kernel(cp), cp.spec);
    devs.push_back(relative_error(cp_conv_forward(cp, x), ref));
    devs.push_back(relative_error(ho_cp_conv_forward(HoCpConvLayer{cp, {}, {}}, x), ref));

    std::vector<std::size_t> ranks;
    for (auto e : kshape) ranks.push_back(std::uniform_int_distribution<std::size_t>(1, e)(rng));
    TuckerTensor tk{random_uniform(ranks, rng), {}};
    for (std::size_t m = 0; m < kshape.size(); ++m) tk.factors.push_back(random_uniform({kshape[m], ranks[m]}, rng));
    const TuckerConvLayer tucker = TuckerConvLayer::from_tucker(tk, cfg.stride, cfg.padding);
    devs.push_back(relative_error(tucker_conv_forward(tucker, x), conv_nd_direct(x, tucker_to_dense(tk), tucker.spec)));

    const MobileNetV1Block v1 = build_mobilenet_v1(random_kruskal(kshape, cfg.c, rng), cfg.stride, cfg.padding);
    devs.push_back(relative_error(mobilenet_v1_forward(v1, x), conv_nd_direct(x, dense_kernel(v1), v1.spec)));

    const MobileNetV2Block v2 = build_mobilenet_v2(k, cfg.stride, cfg.padding);
    devs.push_back(relative_error(mobilenet_v2_forward(v2, x), conv_nd_direct(x, dense_kernel(v2), v2.spec)));

    for (double d : devs) {
      worst = std::max(worst, d);
      if (!(d <= kTol)) ++failures;
    }
  }
  const double elapsed = seconds_since(start);
  return {failures == 0 && elapsed < kBudget,
          std::to_string(kConfigs) + " configs x 5 forwards, worst rel dev " + sci(worst) + " (tol 1e-10), " +
              std::to_string(failures) + " over tol, " + sci(elapsed) + " s (limit 120 s)"};
}

// 2. Conv parameter totals of the 4-block 3-D network.
Outcome jester_params() {
  const NetworkCost c = network_cost(jester_architecture());
  const bool ok = c.params_regular == 2880576 && c.params_hocp == 1180632 &&
                  c.params_regular - c.params_hocp == 1699944;
  return {ok, "regular " + std::to_string(c.params_regular) + " (want 2880576), hocp " +
                  std::to_string(c.params_hocp) + " (want 1180632), difference " +
                  std::to_string(c.params_regular - c.params_hocp) + " (want 1699944)"};
}

// 3. FLOP sweep over the plotted channel pairs.
Outcome figure6() {
  const auto start = Clock::now();
  SweepConfig cfg;
  cfg.pairs = figure6_default_pairs();
  const auto rows = figure6_sweep(cfg);
  bool below = rows.size() == cfg.pairs.size();
  double worst_ratio = 0.0;
  for (const auto& r : rows) {
    for (double g : r.gflops_hocp) below = below && g < r.gflops_regular;
  }
  const std::size_t input[] = {32, 32, 16};
  for (const auto& [c, t] : cfg.pairs) {
    const ConvSpec spec{c, t, cfg.kernel, {1}, cfg.padding};
    const CostReport x3 = hocp_cost(spec, 3 * c, input);
    const CostReport x6 = hocp_cost(spec, 6 * c, input);
    for (std::size_t s = 0; s < x3.stages.size(); ++s) {
      const double ratio = static_cast<double>(x6.stages[s].flops) / static_cast<double>(x3.stages[s].flops);
      worst_ratio = std::max(worst_ratio, std::abs(ratio - 2.0));
    }
    worst_ratio = std::max(worst_ratio, std::abs(static_cast<double>(x6.flops) / x3.flops - 2.0));
  }
  const double elapsed = seconds_since(start);
  return {below && worst_ratio <= 1e-9 && elapsed < 1.0,
          std::to_string(rows.size()) + " pairs, hocp < regular in every row: " + (below ? "yes" : "no") +
              ", max |x6/x3 - 2| " + sci(worst_ratio) + " (tol 1e-9), " + sci(elapsed) + " s (limit 1 s)"};
}

// 4. CP-ALS and Tucker-HOOI recovery of synthetic tensors.
Outcome recovery() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (std::size_t rank : {1, 2, 3}) {
    auto rng = rng_for(100 + rank);
    KruskalTensor truth;
    for (std::size_t e : {6, 5, 4, 4}) truth.factors.push_back(random_normal({e, rank}, rng));
    const DenseTensor t = kruskal_to_dense(truth);
    int good = 0;
    double best = 1.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const CpResult r = cp_als(t, rank, {.max_iters = 500, .tol = 1e-10, .seed = seed});
      best = std::min(best, r.rel_error);
      if (r.rel_error < 1e-6 && r.iterations <= 500) ++good;
    }
    ok = ok && good >= 2;
    detail += "CP R=" + std::to_string(rank) + " " + std::to_string(good) + "/3 below 1e-6 (best " + sci(best) + "); ";
  }
  auto rng = rng_for(200);
  const DenseTensor t = random_uniform({5, 4, 3, 3}, rng);
  const TuckerResult tr = tucker_hooi(t, {5, 4, 3, 3});
  ok = ok && tr.rel_error < 1e-10;
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < 30.0;
  return {ok, detail + "Tucker full rank " + sci(tr.rel_error) + " (tol 1e-10), " + sci(elapsed) + " s (limit 30 s)"};
}

// 5. Instrumented loop counts vs formulas.
Outcome flop_fidelity() {
  auto rng = rng_for(300);
  std::uniform_int_distribution<std::size_t> rank_dist(1, 6);
  int exact = 0;
  constexpr int kInstances = 20;
  for (int i = 0; i < kInstances; ++i) {
    const auto cfg = random_config(rng);
    const std::size_t rank = rank_dist(rng);
    const KruskalTensor k = random_kruskal(kernel_shape(cfg.t, cfg.c, cfg.kernel), rank, rng);
    const ConvSpec spec{cfg.c, cfg.t, cfg.kernel, cfg.stride, cfg.padding};
    const DenseTensor x = random_uniform(activation_shape(cfg.c, cfg.input), rng);
    const auto reg = counted_regular_conv(x, kruskal_to_dense(k), spec);
    const auto ho = counted_hocp_conv(x, k, spec);
    const CostReport report = hocp_cost(spec, rank, cfg.input);
    bool same = 2 * reg.macs == flops_regular(spec, cfg.input) && report.stages.size() == ho.macs.size();
    std::uint64_t total = 0;
    for (std::size_t s = 0; same && s < ho.macs.size(); ++s) {
      same = 2 * ho.macs[s] == report.stages[s].flops;
      total += 2 * ho.macs[s];
    }
    same = same && total == flops_hocp(spec, rank, cfg.input);
    exact += same;
  }
  return {exact == kInstances, std::to_string(exact) + "/" + std::to_string(kInstances) +
                                   " instances with regular and per-stage HO-CP counts equal to the formulas"};
}

// 6. decompose -> conv --plan -> verify, through files only.
Outcome cli_round_trip(const std::string& exe) {
  const fs::path dir = fs::temp_directory_path() / "tfconv_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&dir](const std::string& name) { return (dir / name).string(); };

  auto rng = rng_for(600);
  save_tensor(p("w_random.tensor"), random_normal({6, 4, 3, 3}, rng));
  save_tensor(p("w_lowrank.tensor"), kruskal_to_dense(random_kruskal({6, 4, 3, 3}, 3, rng)));
  save_tensor(p("x.tensor"), random_normal({4, 12, 10}, rng));

  struct Case {
    std::string kernel, scheme, rank;
  };
  const Case cases[] = {{"w_random", "tucker", "6,4"}, {"w_lowrank", "hocp", "3"}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const std::string plan = p(c.kernel + "_" + c.scheme);
    const std::string kernel = p(c.kernel + ".tensor");
    const auto dec = run_cli(exe, "decompose --input " + kernel + " --scheme " + c.scheme + " --rank " + c.rank +
                                      " --seed 1 --out " + plan);
    const std::string geometry = " --input " + p("x.tensor") + " --stride 1 --padding 1";
    const auto direct = run_cli(exe, "conv" + geometry + " --kernel " + kernel + " --out " + plan + "_direct.tensor");
    const auto fact =
        run_cli(exe, "conv" + geometry + " --plan " + plan + "/manifest.json --out " + plan + "_plan.tensor");
    const auto ver = run_cli(exe, "verify --plan " + plan + "/manifest.json --kernel " + kernel +
                                      " --tol 1e-8 --probes 8 --seed 11");
    double dev = INFINITY;
    if (dec.exit_code == 0 && direct.exit_code == 0 && fact.exit_code == 0) {
      const DenseTensor a = load_tensor(plan + "_direct.tensor");
      const DenseTensor b = load_tensor(plan + "_plan.tensor");
      if (a.shape() == b.shape()) dev = relative_error(b, a);
    }
    const bool passed = ver.exit_code == 0 && ver.values.count("status") && ver.values.at("status") == "pass";
    ok = ok && dev <= 1e-8 && passed;
    detail += c.scheme + ": conv --plan vs direct " + sci(dev) + ", verify " +
              (ver.values.count("status") ? ver.values.at("status") : "error") + " at 1e-8 (max_rel_dev " +
              (ver.values.count("max_rel_dev") ? ver.values.at("max_rel_dev") : "n/a") + "); ";
  }
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 oracle-equivalence", oracle_equivalence},
      {"2 jester-parameter-counts", jester_params},
      {"3 figure6-flop-sweep", figure6},
      {"4 decomposition-recovery", recovery},
      {"5 flop-formula-fidelity", flop_fidelity},
      {"6 cli-round-trip", [] { return cli_round_trip(TFCONV_CLI); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
