#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tfconv/tensor.hpp"

namespace tfconv {

// Sum of R rank-1 terms. Factor k has shape (extent_k x R). There is no
// separate weight vector; any scale lives in the factors (cp_als puts it in
// the last one).
struct KruskalTensor {
  std::vector<DenseTensor> factors;

  std::size_t rank() const;
  std::size_t order() const { return factors.size(); }
  Shape shape() const;
  // Throws DimensionError unless every factor is 2-D with the same column count.
  void validate() const;
};

// Core contracted with one factor per mode. Factor k has shape
// (extent_k x R_k) and core extent k equals R_k.
struct TuckerTensor {
  DenseTensor core;
  std::vector<DenseTensor> factors;

  std::size_t order() const { return factors.size(); }
  Shape shape() const;
  Shape ranks() const { return core.shape(); }
  void validate() const;
};

DenseTensor kruskal_to_dense(const KruskalTensor& k);
DenseTensor tucker_to_dense(const TuckerTensor& t);

enum class CpInit { Random, Hosvd };

struct CpAlsOptions {
  std::size_t max_iters = 500;
  // Stop once the relative change of the reconstruction error drops below this.
  double tol = 1e-8;
  std::uint64_t seed = 0;
  CpInit init = CpInit::Random;
  // Warm start; overrides `init` when set. Must have the requested rank.
  std::optional<KruskalTensor> initial;
  // Modes whose factors are held at their initial value (requires `initial`).
  std::vector<std::size_t> fixed_modes;
};

struct CpResult {
  KruskalTensor kruskal;
  double rel_error = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Relative error after initialisation, then after every sweep.
  std::vector<double> error_history;
};

// Singular values at or below this fraction of the largest one are treated
// as zero when solving the ALS normal equations.
inline constexpr double kPinvCutoff = 1e-12;

// Rank-R CP decomposition by alternating least squares.
// Deterministic for a fixed seed. Non-convergence is not an error: the best
// iterate is returned together with its error.
CpResult cp_als(const DenseTensor& t, std::size_t rank, const CpAlsOptions& options = {});

struct TuckerOptions {
  std::size_t max_iters = 500;
  double tol = 1e-8;
};

struct TuckerResult {
  TuckerTensor tucker;
  double rel_error = 0.0;
  std::size_t iterations = 0;
  std::vector<double> error_history;
  // Ranks capped at the mode extent are reported here.
  std::vector<std::string> warnings;
};

// HOSVD-initialised higher-order orthogonal iteration. Factors come back
// with orthonormal columns.
TuckerResult tucker_hooi(const DenseTensor& t, const std::vector<std::size_t>& ranks,
                         const TuckerOptions& options = {});

// H = G x_m U^(m) for every listed mode m; those factors become identities.
// The reconstructed tensor is unchanged. Defaults to all modes >= 2 (the
// spatial modes of a T x C x K... kernel).
TuckerTensor absorb_spatial(const TuckerTensor& t, std::vector<std::size_t> spatial_modes = {});

// Merged spatial factor S[k_0, ..., k_{N-1}, r] = prod_i U^(K_i)[k_i, r]
// for a Kruskal kernel ordered (U^(T), U^(C), U^(K_0), ...).
DenseTensor merge_spatial(const KruskalTensor& k);

struct MergedFactors {
  DenseTensor pointwise;  // U^(T) U^(C)^T, T x C
  DenseTensor spatial;    // K_0 x ... x K_{N-1} x R
};

// Depthwise-separable split of a Kruskal kernel. Requires R == C.
MergedFactors merge_spatial_factors(const KruskalTensor& k);

}  // namespace tfconv
