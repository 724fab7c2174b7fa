#include "tfconv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "tfconv/decomp.hpp"
#include "tfconv/error.hpp"

namespace tfconv {

namespace {

std::vector<std::size_t> probe_extents(const ConvSpec& spec, std::size_t extent) {
  std::vector<std::size_t> e;
  for (auto k : spec.kernel) e.push_back(std::max(extent, k));
  return e;
}

std::string ranks_to_string(const std::vector<std::size_t>& ranks) {
  std::string s;
  for (auto r : ranks) s += (s.empty() ? "" : ",") + std::to_string(r);
  return s.empty() ? "(none)" : s;
}

std::size_t single_rank(const CompressOptions& options, Scheme scheme) {
  if (options.ranks.size() != 1 || options.ranks[0] == 0) {
    throw PreconditionError(scheme_name(scheme) + " needs exactly one rank >= 1, got " +
                            ranks_to_string(options.ranks) + "; pass e.g. --rank 8");
  }
  return options.ranks[0];
}

CpAlsOptions als_options(const CompressOptions& options, std::uint64_t seed) {
  CpAlsOptions o;
  o.max_iters = options.max_iters;
  o.tol = options.tol;
  o.seed = seed;
  return o;
}

CpResult best_of(std::vector<CpResult> candidates) {
  auto it = std::min_element(candidates.begin(), candidates.end(),
                             [](const CpResult& a, const CpResult& b) { return a.rel_error < b.rel_error; });
  return std::move(*it);
}

CpResult restarted_cp(const DenseTensor& kernel, std::size_t rank, const CompressOptions& options) {
  std::vector<CpResult> runs;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, options.restarts); ++i) {
    runs.push_back(cp_als(kernel, rank, als_options(options, options.seed + i)));
  }
  return best_of(std::move(runs));
}

// Depthwise-separable fit: CP with rank C and the input-channel factor held
// at the identity, so no channel mixing happens before the spatial stage.
CpResult restarted_depthwise_cp(const DenseTensor& kernel, const CompressOptions& options) {
  const std::size_t channels = kernel.extent(1);
  std::vector<CpResult> runs;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, options.restarts); ++i) {
    std::mt19937_64 rng(options.seed + i);
    KruskalTensor init;
    for (std::size_t m = 0; m < kernel.order(); ++m) {
      init.factors.push_back(m == 1 ? DenseTensor::identity(channels)
                                    : random_uniform({kernel.extent(m), channels}, rng));
    }
    CpAlsOptions o = als_options(options, options.seed + i);
    o.initial = std::move(init);
    o.fixed_modes = {1};
    runs.push_back(cp_als(kernel, channels, o));
  }
  return best_of(std::move(runs));
}

PlanLayer cp_layer(Scheme scheme, KruskalTensor k, const CompressOptions& options) {
  CpConvLayer layer = CpConvLayer::from_kruskal(std::move(k), options.stride, options.padding);
  if (scheme == Scheme::HoCp) return HoCpConvLayer{std::move(layer), {}, {}};
  return layer;
}

CompressionResult finish(const DenseTensor& kernel, const ConvSpec& spec, PlanLayer layer,
                         const CompressOptions& options, std::vector<std::string> warnings) {
  const auto extents = probe_extents(spec, options.probe_extent);
  CompressionResult r;
  r.plan = make_plan(std::move(layer), extents);
  r.kernel_rel_error = relative_error(reconstruct_kernel(r.plan), kernel);
  r.cost_before = regular_cost(spec, extents);
  r.cost_after = r.plan.cost;
  r.output_rel_error = verify_equivalence(r.plan, kernel, std::numeric_limits<double>::infinity(), options.probes,
                                          options.seed, options.probe_extent)
                           .worst_deviation;
  r.warnings = std::move(warnings);
  return r;
}

ConvSpec checked_spec(const DenseTensor& kernel, const CompressOptions& options) {
  if (kernel.order() < 3) {
    throw DimensionError("kernel must be T x C x K_0 x ... (order >= 3), got " + shape_to_string(kernel.shape()));
  }
  if (options.probes == 0) throw PreconditionError("at least one probe is required");
  return ConvSpec::for_kernel(kernel, options.stride, options.padding);
}

}  // namespace

CompressionResult compress(const DenseTensor& kernel, Scheme scheme, const CompressOptions& options) {
  const ConvSpec spec = checked_spec(kernel, options);
  switch (scheme) {
    case Scheme::Cp:
    case Scheme::HoCp: {
      CpResult cp = restarted_cp(kernel, single_rank(options, scheme), options);
      return finish(kernel, spec, cp_layer(scheme, std::move(cp.kruskal), options), options, {});
    }
    case Scheme::MobileNetV2: {
      CpResult cp = restarted_cp(kernel, single_rank(options, scheme), options);
      return finish(kernel, spec, build_mobilenet_v2(cp.kruskal, options.stride, options.padding), options, {});
    }
    case Scheme::MobileNetV1: {
      if (!options.ranks.empty() && (options.ranks.size() != 1 || options.ranks[0] != spec.in_channels)) {
        throw PreconditionError("mobilenet-v1 needs rank == input channels (" + std::to_string(spec.in_channels) +
                                "), got " + ranks_to_string(options.ranks) + "; pass --rank " +
                                std::to_string(spec.in_channels) + " or use mobilenet-v2 / cp for other ranks");
      }
      CpResult cp = restarted_depthwise_cp(kernel, options);
      return finish(kernel, spec, build_mobilenet_v1(cp.kruskal, options.stride, options.padding), options, {});
    }
    case Scheme::Tucker: {
      std::vector<std::size_t> ranks = options.ranks;
      if (ranks.size() == 2) {
        ranks.insert(ranks.end(), spec.kernel.begin(), spec.kernel.end());
      } else if (ranks.size() != kernel.order()) {
        throw PreconditionError("tucker needs 2 ranks (output, input channels) or " + std::to_string(kernel.order()) +
                                " ranks (one per kernel mode), got " + ranks_to_string(options.ranks));
      }
      for (auto r : ranks)
        if (r == 0) throw PreconditionError("tucker ranks must be >= 1, got " + ranks_to_string(options.ranks));
      TuckerResult tk = tucker_hooi(kernel, ranks, {options.max_iters, options.tol});
      return finish(kernel, spec, TuckerConvLayer::from_tucker(tk.tucker, options.stride, options.padding), options,
                    std::move(tk.warnings));
    }
  }
  throw PreconditionError("unsupported scheme");
}

std::vector<CompressionResult> compress_rank_sweep(const DenseTensor& kernel, Scheme scheme,
                                                   const std::vector<std::size_t>& ranks,
                                                   const CompressOptions& options) {
  if (scheme != Scheme::Cp && scheme != Scheme::HoCp) {
    throw PreconditionError("rank sweeps are defined for the cp and hocp schemes");
  }
  if (!std::is_sorted(ranks.begin(), ranks.end())) throw PreconditionError("sweep ranks must be non-decreasing");
  const ConvSpec spec = checked_spec(kernel, options);

  std::vector<CompressionResult> out;
  std::optional<KruskalTensor> prev;
  double prev_error = std::numeric_limits<double>::infinity();
  for (std::size_t rank : ranks) {
    if (rank == 0) throw PreconditionError("sweep ranks must be >= 1");
    std::vector<CpResult> candidates;
    candidates.push_back(restarted_cp(kernel, rank, options));
    std::optional<KruskalTensor> padded;
    if (prev) {
      std::mt19937_64 rng(options.seed ^ (0x9e3779b97f4a7c15ULL * rank));
      KruskalTensor warm;
      KruskalTensor zero_ext;
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      const std::size_t last = prev->factors.size() - 1;
      double last_scale = 0.0;
      for (double v : prev->factors[last].data()) last_scale = std::max(last_scale, std::abs(v));
      for (std::size_t m = 0; m <= last; ++m) {
        const DenseTensor& f = prev->factors[m];
        // New components start small in the last factor only.
        const double scale = m == last ? 1e-2 * last_scale : 1.0;
        DenseTensor w({f.extent(0), rank});
        DenseTensor z({f.extent(0), rank});
        for (std::size_t i = 0; i < f.extent(0); ++i)
          for (std::size_t r = 0; r < rank; ++r) {
            const bool old = r < f.extent(1);
            z(i, r) = old ? f(i, r) : 0.0;
            w(i, r) = old ? f(i, r) : scale * dist(rng);
          }
        warm.factors.push_back(std::move(w));
        zero_ext.factors.push_back(std::move(z));
      }
      CpAlsOptions o = als_options(options, options.seed);
      o.initial = std::move(warm);
      candidates.push_back(cp_als(kernel, rank, o));
      padded = std::move(zero_ext);
    }
    CpResult best = best_of(std::move(candidates));
    if (padded && best.rel_error > prev_error) {
      best.kruskal = *padded;
      best.rel_error = prev_error;
    }
    prev = best.kruskal;
    prev_error = best.rel_error;
    out.push_back(finish(kernel, spec, cp_layer(scheme, std::move(best.kruskal), options), options, {}));
  }
  return out;
}

DenseTensor make_probe(const ConvSpec& spec, std::size_t extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Shape shape{spec.in_channels};
  for (auto e : probe_extents(spec, extent)) shape.push_back(e);
  return random_normal(shape, rng);
}

EquivalenceReport verify_equivalence(const FactorizedPlan& plan, const DenseTensor& kernel, double tolerance,
                                     std::size_t probes, std::uint64_t seed, std::size_t probe_extent) {
  if (probes == 0) throw PreconditionError("at least one probe is required");
  const ConvSpec& spec = plan.spec();
  EquivalenceReport rep;
  rep.worst_deviation = 0.0;
  rep.worst_probe_seed = seed;
  for (std::size_t i = 0; i < probes; ++i) {
    const std::uint64_t probe_seed = seed + i;
    const DenseTensor x = make_probe(spec, probe_extent, probe_seed);
    const double dev = relative_error(execute(plan, x), conv_nd_direct(x, kernel, spec));
    rep.deviations.push_back(dev);
    if (i == 0 || dev > rep.worst_deviation || (std::isnan(dev) && !std::isnan(rep.worst_deviation))) {
      rep.worst_deviation = dev;
      rep.worst_probe_seed = probe_seed;
    }
  }
  rep.passed = std::isinf(tolerance) ? true : rep.worst_deviation <= tolerance;
  return rep;
}

}  // namespace tfconv
