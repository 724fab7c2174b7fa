#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tfconv/tensor.hpp"

namespace tfconv {

// n-mode product P = T x_mode M with M of shape (J x I_mode):
//   P[.., j, ..] = sum_k M[j, k] T[.., k, ..]
// The sum over k runs in increasing order.
DenseTensor n_mode_product(const DenseTensor& t, const DenseTensor& m, std::size_t mode);

// 1-D cross-correlation of every fibre along `mode` with `kernel`:
//   out[.., y, ..] = sum_k kernel[k] * t[.., y*stride + k - padding, ..]
// with zeros outside the input. Output extent at `mode` is
// floor((D + 2*padding - K) / stride) + 1.
DenseTensor mode_conv_1d(const DenseTensor& t, std::span<const double> kernel, std::size_t mode,
                         std::size_t stride = 1, std::size_t padding = 0);

// Grouped (depthwise) variant: slice g of mode 0 is correlated along `mode`
// with column g of `kernels` (shape K x G, G == t.extent(0)). `mode` >= 1.
DenseTensor grouped_mode_conv_1d(const DenseTensor& t, const DenseTensor& kernels, std::size_t mode,
                                 std::size_t stride = 1, std::size_t padding = 0);

// Mode-n unfolding: rows are indexed by mode n, columns by the remaining
// modes taken in increasing mode order, row-major (last mode fastest).
DenseTensor unfold(const DenseTensor& t, std::size_t mode);
// Exact inverse of unfold for the given target shape.
DenseTensor fold(const DenseTensor& m, std::size_t mode, const Shape& shape);

// Column-wise Kronecker product. Row index of the result is row-major over
// the factors' rows, first factor slowest, which matches the column order of
// unfold() when the factors are listed in increasing mode order.
DenseTensor khatri_rao(std::span<const DenseTensor> factors);

DenseTensor matmul(const DenseTensor& a, const DenseTensor& b);
DenseTensor transpose(const DenseTensor& m);
// A^T A for a matrix.
DenseTensor gram(const DenseTensor& m);
DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b);

// Extent after a strided, padded 1-D correlation; throws when the kernel is
// longer than the padded input or stride is zero.
std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride, std::size_t padding);

}  // namespace tfconv
