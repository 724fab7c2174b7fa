#include "tfconv/multilinear.hpp"

#include <string>

#include "tfconv/error.hpp"

namespace tfconv {

namespace {

// View of a tensor as (outer, extent(mode), inner).
struct ModeSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

ModeSplit split_at(const Shape& shape, std::size_t mode) {
  ModeSplit s;
  for (std::size_t k = 0; k < mode; ++k) s.outer *= shape[k];
  s.extent = shape[mode];
  for (std::size_t k = mode + 1; k < shape.size(); ++k) s.inner *= shape[k];
  return s;
}

void require_matrix(const DenseTensor& m, const char* what) {
  if (m.order() != 2) {
    throw DimensionError(std::string(what) + " must be 2-D, got shape " + shape_to_string(m.shape()));
  }
}

void require_mode(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) {
    throw DimensionError("mode " + std::to_string(mode) + " out of range for tensor of order " +
                         std::to_string(t.order()));
  }
}

}  // namespace

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (stride == 0) throw DimensionError("stride must be >= 1");
  const std::size_t padded = input + 2 * padding;
  if (kernel > padded) {
    throw DimensionError("kernel extent " + std::to_string(kernel) + " exceeds padded input extent " +
                         std::to_string(padded));
  }
  return (padded - kernel) / stride + 1;
}

DenseTensor n_mode_product(const DenseTensor& t, const DenseTensor& m, std::size_t mode) {
  require_mode(t, mode);
  require_matrix(m, "n-mode product matrix");
  const std::size_t rows = m.extent(0);
  const std::size_t cols = m.extent(1);
  if (cols != t.extent(mode)) {
    throw DimensionError("n-mode product at mode " + std::to_string(mode) + ": tensor extent " +
                         std::to_string(t.extent(mode)) + " vs matrix columns " + std::to_string(cols));
  }
  const ModeSplit s = split_at(t.shape(), mode);
  Shape out_shape = t.shape();
  out_shape[mode] = rows;
  DenseTensor out(out_shape);

  auto src = t.data();
  auto dst = out.data();
  auto md = m.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    const double* tin = src.data() + o * s.extent * s.inner;
    double* tout = dst.data() + o * rows * s.inner;
    for (std::size_t j = 0; j < rows; ++j) {
      const double* mrow = md.data() + j * cols;
      double* orow = tout + j * s.inner;
      for (std::size_t k = 0; k < cols; ++k) {
        const double w = mrow[k];
        const double* irow = tin + k * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) orow[i] += w * irow[i];
      }
    }
  }
  return out;
}

namespace {

// Correlates the (extent x inner) block `in` along its first axis.
void correlate_block(const double* in, double* out, std::size_t extent, std::size_t inner,
                     std::size_t out_extent, const double* kernel, std::size_t klen,
                     std::size_t stride, std::size_t padding) {
  for (std::size_t y = 0; y < out_extent; ++y) {
    double* orow = out + y * inner;
    for (std::size_t k = 0; k < klen; ++k) {
      const std::ptrdiff_t pos =
          static_cast<std::ptrdiff_t>(y * stride + k) - static_cast<std::ptrdiff_t>(padding);
      if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(extent)) continue;
      const double w = kernel[k];
      const double* irow = in + static_cast<std::size_t>(pos) * inner;
      for (std::size_t i = 0; i < inner; ++i) orow[i] += w * irow[i];
    }
  }
}

}  // namespace

DenseTensor mode_conv_1d(const DenseTensor& t, std::span<const double> kernel, std::size_t mode,
                         std::size_t stride, std::size_t padding) {
  require_mode(t, mode);
  if (kernel.empty()) throw DimensionError("1-D kernel must have at least one tap");
  const std::size_t out_extent = conv_output_extent(t.extent(mode), kernel.size(), stride, padding);
  const ModeSplit s = split_at(t.shape(), mode);
  Shape out_shape = t.shape();
  out_shape[mode] = out_extent;
  DenseTensor out(out_shape);
  for (std::size_t o = 0; o < s.outer; ++o) {
    correlate_block(t.data().data() + o * s.extent * s.inner, out.data().data() + o * out_extent * s.inner,
                    s.extent, s.inner, out_extent, kernel.data(), kernel.size(), stride, padding);
  }
  return out;
}

DenseTensor grouped_mode_conv_1d(const DenseTensor& t, const DenseTensor& kernels, std::size_t mode,
                                 std::size_t stride, std::size_t padding) {
  require_mode(t, mode);
  require_matrix(kernels, "grouped 1-D kernels");
  if (mode == 0) throw DimensionError("grouped 1-D convolution cannot run along the group mode 0");
  const std::size_t klen = kernels.extent(0);
  const std::size_t groups = kernels.extent(1);
  if (groups != t.extent(0)) {
    throw DimensionError("grouped 1-D convolution: " + std::to_string(groups) + " kernel columns vs " +
                         std::to_string(t.extent(0)) + " groups at mode 0");
  }
  const std::size_t out_extent = conv_output_extent(t.extent(mode), klen, stride, padding);
  const ModeSplit s = split_at(t.shape(), mode);
  const std::size_t per_group = s.outer / groups;
  Shape out_shape = t.shape();
  out_shape[mode] = out_extent;
  DenseTensor out(out_shape);

  std::vector<double> column(klen);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t k = 0; k < klen; ++k) column[k] = kernels(k, g);
    for (std::size_t p = 0; p < per_group; ++p) {
      const std::size_t o = g * per_group + p;
      correlate_block(t.data().data() + o * s.extent * s.inner, out.data().data() + o * out_extent * s.inner,
                      s.extent, s.inner, out_extent, column.data(), klen, stride, padding);
    }
  }
  return out;
}

DenseTensor unfold(const DenseTensor& t, std::size_t mode) {
  require_mode(t, mode);
  const ModeSplit s = split_at(t.shape(), mode);
  const std::size_t cols = s.outer * s.inner;
  DenseTensor out({s.extent, cols});
  auto src = t.data();
  auto dst = out.data();
  // Column index of (outer o, inner i) is o * inner + i.
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t r = 0; r < s.extent; ++r)
      for (std::size_t i = 0; i < s.inner; ++i)
        dst[r * cols + o * s.inner + i] = src[(o * s.extent + r) * s.inner + i];
  return out;
}

DenseTensor fold(const DenseTensor& m, std::size_t mode, const Shape& shape) {
  require_matrix(m, "folded matrix");
  DenseTensor out(shape);
  require_mode(out, mode);
  const ModeSplit s = split_at(shape, mode);
  const std::size_t cols = s.outer * s.inner;
  if (m.extent(0) != s.extent || m.extent(1) != cols) {
    throw DimensionError("fold at mode " + std::to_string(mode) + ": matrix " + shape_to_string(m.shape()) +
                         " inconsistent with target shape " + shape_to_string(shape));
  }
  auto src = m.data();
  auto dst = out.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t r = 0; r < s.extent; ++r)
      for (std::size_t i = 0; i < s.inner; ++i)
        dst[(o * s.extent + r) * s.inner + i] = src[r * cols + o * s.inner + i];
  return out;
}

DenseTensor khatri_rao(std::span<const DenseTensor> factors) {
  if (factors.empty()) throw DimensionError("khatri_rao needs at least one factor");
  for (const auto& f : factors) require_matrix(f, "Khatri-Rao factor");
  const std::size_t rank = factors.front().extent(1);
  for (const auto& f : factors) {
    if (f.extent(1) != rank) {
      throw DimensionError("Khatri-Rao factors disagree on column count: " + std::to_string(rank) + " vs " +
                           std::to_string(f.extent(1)));
    }
  }
  DenseTensor acc = factors.front();
  for (std::size_t n = 1; n < factors.size(); ++n) {
    const DenseTensor& f = factors[n];
    const std::size_t ar = acc.extent(0);
    const std::size_t fr = f.extent(0);
    DenseTensor next({ar * fr, rank});
    const double* a = acc.data().data();
    const double* b = f.data().data();
    double* out = next.data().data();
    for (std::size_t i = 0; i < ar; ++i)
      for (std::size_t j = 0; j < fr; ++j, out += rank)
        for (std::size_t r = 0; r < rank; ++r) out[r] = a[i * rank + r] * b[j * rank + r];
    acc = std::move(next);
  }
  return acc;
}

DenseTensor matmul(const DenseTensor& a, const DenseTensor& b) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.extent(1) != b.extent(0)) {
    throw DimensionError("matmul inner extents differ: " + shape_to_string(a.shape()) + " * " +
                         shape_to_string(b.shape()));
  }
  // a * b == b x_0 a on the matrix b.
  return n_mode_product(b, a, 0);
}

DenseTensor transpose(const DenseTensor& m) {
  require_matrix(m, "transpose operand");
  const std::size_t rows = m.extent(0), cols = m.extent(1);
  DenseTensor out({cols, rows});
  const double* src = m.data().data();
  double* dst = out.data().data();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
  return out;
}

DenseTensor gram(const DenseTensor& m) { return matmul(transpose(m), m); }

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("hadamard shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
  DenseTensor out = a;
  auto od = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] *= bd[i];
  return out;
}

}  // namespace tfconv
