#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tfconv/tensor.hpp"

namespace tfconv {

// Geometry of an N-D convolution without bias. Empty stride / padding mean
// 1 / 0 in every spatial mode; a single entry is broadcast to all modes.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::vector<std::size_t> kernel;
  std::vector<std::size_t> stride;
  std::vector<std::size_t> padding;

  std::size_t spatial_order() const { return kernel.size(); }
  std::size_t stride_at(std::size_t mode) const;
  std::size_t padding_at(std::size_t mode) const;
  std::size_t kernel_volume() const;
  std::size_t kernel_sum() const;

  void validate() const;
  // Output spatial extents for the given input spatial extents.
  std::vector<std::size_t> output_extents(std::span<const std::size_t> input) const;

  // Spec matching a T x C x K_0 x ... kernel.
  static ConvSpec for_kernel(const DenseTensor& kernel, std::vector<std::size_t> stride = {},
                             std::vector<std::size_t> padding = {});
};

// Reference N-D cross-correlation
//   F[t, y] = sum_c sum_k W[t, c, k] X[c, y*s + k - p]
// with x of shape C x D_0 x ... and w of shape T x C x K_0 x ....
// Naive loops, fixed reduction order (c, then kernel offsets row-major).
DenseTensor conv_nd_direct(const DenseTensor& x, const DenseTensor& w, const ConvSpec& spec);
DenseTensor conv_nd_direct(const DenseTensor& x, const DenseTensor& w);

// Pointwise convolution by a T x C matrix; a mode-0 contraction.
DenseTensor conv_1x1(const DenseTensor& x, const DenseTensor& w2d);

// Depthwise N-D correlation: channel r of x is correlated with
// kernels[..., r]. kernels has shape K_0 x ... x K_{N-1} x R and the spec's
// in/out channels must both equal R.
DenseTensor depthwise_conv_nd(const DenseTensor& x, const DenseTensor& kernels, const ConvSpec& spec);

}  // namespace tfconv
