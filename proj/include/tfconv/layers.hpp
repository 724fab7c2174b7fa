#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tfconv/activation.hpp"
#include "tfconv/conv.hpp"
#include "tfconv/decomp.hpp"
#include "tfconv/tensor.hpp"

namespace tfconv {

// Separable convolution from a Kruskal kernel with factors ordered
// (U^(T), U^(C), U^(K_0), ..., U^(K_{N-1})).
struct CpConvLayer {
  KruskalTensor kruskal;
  ConvSpec spec;

  static CpConvLayer from_kruskal(KruskalTensor k, std::vector<std::size_t> stride = {},
                                  std::vector<std::size_t> padding = {});
  std::size_t rank() const { return kruskal.rank(); }
  const DenseTensor& output_factor() const { return kruskal.factors[0]; }
  const DenseTensor& input_factor() const { return kruskal.factors[1]; }
  const DenseTensor& spatial_factor(std::size_t mode) const { return kruskal.factors[mode + 2]; }
  void validate() const;
};

// Bottleneck: 1x1 down-projection, small dense convolution, 1x1 up-projection.
struct TuckerConvLayer {
  DenseTensor down;  // R_1 x C
  DenseTensor core;  // R_0 x R_1 x K_0 x ... (spatial factors absorbed)
  DenseTensor up;    // T x R_0
  ConvSpec spec;

  // Absorbs the spatial factors of a T x C x K... Tucker kernel first.
  static TuckerConvLayer from_tucker(const TuckerTensor& t, std::vector<std::size_t> stride = {},
                                     std::vector<std::size_t> padding = {});
  void validate() const;
};

// Higher-order CP convolution: channel contraction, one grouped 1-D
// convolution per spatial mode (each optionally followed by activations),
// output projection, optional skip connection.
struct HoCpConvLayer {
  CpConvLayer cp;
  // Empty, or one entry per spatial mode.
  std::vector<StageActivation> activations;
  // T x C; only allowed when the layer preserves spatial extents.
  std::optional<DenseTensor> skip;

  void validate() const;
};

struct MobileNetV1Block {
  DenseTensor spatial;    // K_0 x ... x K_{N-1} x C, depthwise kernels
  DenseTensor pointwise;  // T x C
  ConvSpec spec;

  void validate() const;
};

struct MobileNetV2Block {
  DenseTensor down;     // R x C
  DenseTensor spatial;  // K_0 x ... x K_{N-1} x R
  DenseTensor up;       // T x R
  ConvSpec spec;

  std::size_t rank() const { return down.extent(0); }
  // R / C; an integer for the usual inverted-bottleneck construction.
  double expansion() const;
  void validate() const;
};

// True when stride is 1 and padding is (K - 1) / 2 with odd K in every mode.
bool preserves_extents(const ConvSpec& spec);

// Depthwise-separable block. Requires R == C. The block is exactly the CP
// layer when U^(C) is diagonal; otherwise it implements the kernel
// pointwise[t, c] * spatial[k, c] (see dense_kernel).
MobileNetV1Block build_mobilenet_v1(const KruskalTensor& k, std::vector<std::size_t> stride = {},
                                    std::vector<std::size_t> padding = {});
// Inverted bottleneck; always equivalent to the CP layer of `k`.
MobileNetV2Block build_mobilenet_v2(const KruskalTensor& k, std::vector<std::size_t> stride = {},
                                    std::vector<std::size_t> padding = {});

DenseTensor cp_conv_forward(const CpConvLayer& layer, const DenseTensor& x);
// Spatial stages run in the given order of spatial modes (a permutation of 0..N-1).
DenseTensor cp_conv_forward(const CpConvLayer& layer, const DenseTensor& x, std::span<const std::size_t> mode_order);
DenseTensor tucker_conv_forward(const TuckerConvLayer& layer, const DenseTensor& x);
DenseTensor ho_cp_conv_forward(const HoCpConvLayer& layer, const DenseTensor& x);
DenseTensor mobilenet_v1_forward(const MobileNetV1Block& block, const DenseTensor& x);
DenseTensor mobilenet_v2_forward(const MobileNetV2Block& block, const DenseTensor& x);

// T x C x K... kernel each layer implements (activations and skip ignored).
DenseTensor dense_kernel(const CpConvLayer& layer);
DenseTensor dense_kernel(const TuckerConvLayer& layer);
DenseTensor dense_kernel(const HoCpConvLayer& layer);
DenseTensor dense_kernel(const MobileNetV1Block& block);
DenseTensor dense_kernel(const MobileNetV2Block& block);

}  // namespace tfconv
