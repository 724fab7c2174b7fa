#include "tfconv/conv.hpp"

#include <algorithm>
#include <string>

#include "tfconv/error.hpp"
#include "tfconv/multilinear.hpp"

namespace tfconv {

namespace {

std::size_t broadcast_at(const std::vector<std::size_t>& v, std::size_t mode, std::size_t fallback) {
  if (v.empty()) return fallback;
  if (v.size() == 1) return v.front();
  return v.at(mode);
}

bool next_index(std::vector<std::size_t>& idx, std::span<const std::size_t> extents) {
  for (std::size_t m = idx.size(); m-- > 0;) {
    if (++idx[m] < extents[m]) return true;
    idx[m] = 0;
  }
  return false;
}

void check_input(const DenseTensor& x, const ConvSpec& spec) {
  if (x.order() != spec.spatial_order() + 1) {
    throw DimensionError("input of shape " + shape_to_string(x.shape()) + " for a " +
                         std::to_string(spec.spatial_order()) + "-D convolution");
  }
  if (x.extent(0) != spec.in_channels) {
    throw DimensionError("input has " + std::to_string(x.extent(0)) + " channels, kernel expects " +
                         std::to_string(spec.in_channels));
  }
}

std::vector<std::size_t> spatial_extents(const DenseTensor& x) {
  return {x.shape().begin() + 1, x.shape().end()};
}

// Input offsets along each mode for every (output, kernel) pair; -1 marks padding.
struct Taps {
  std::vector<std::vector<std::ptrdiff_t>> pos;  // [mode][y * K + k]
};

Taps make_taps(const ConvSpec& spec, std::span<const std::size_t> in, std::span<const std::size_t> out) {
  Taps t;
  for (std::size_t m = 0; m < spec.spatial_order(); ++m) {
    const std::size_t k_len = spec.kernel[m];
    std::vector<std::ptrdiff_t> p(out[m] * k_len);
    for (std::size_t y = 0; y < out[m]; ++y)
      for (std::size_t k = 0; k < k_len; ++k) {
        const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(y * spec.stride_at(m) + k) -
                                 static_cast<std::ptrdiff_t>(spec.padding_at(m));
        p[y * k_len + k] = (q >= 0 && q < static_cast<std::ptrdiff_t>(in[m])) ? q : -1;
      }
    t.pos.push_back(std::move(p));
  }
  return t;
}

}  // namespace

std::size_t ConvSpec::stride_at(std::size_t mode) const { return broadcast_at(stride, mode, 1); }
std::size_t ConvSpec::padding_at(std::size_t mode) const { return broadcast_at(padding, mode, 0); }

std::size_t ConvSpec::kernel_volume() const { return shape_volume(kernel); }

std::size_t ConvSpec::kernel_sum() const {
  std::size_t s = 0;
  for (auto k : kernel) s += k;
  return s;
}

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0) throw DimensionError("channel counts must be >= 1");
  if (kernel.empty()) throw DimensionError("convolution needs at least one spatial mode");
  for (auto k : kernel)
    if (k == 0) throw DimensionError("kernel extents must be >= 1");
  for (const auto* v : {&stride, &padding}) {
    if (v->size() > 1 && v->size() != kernel.size()) {
      throw DimensionError("stride/padding lists must have 1 or " + std::to_string(kernel.size()) + " entries");
    }
  }
  for (std::size_t m = 0; m < kernel.size(); ++m)
    if (stride_at(m) == 0) throw DimensionError("stride must be >= 1");
}

std::vector<std::size_t> ConvSpec::output_extents(std::span<const std::size_t> input) const {
  if (input.size() != kernel.size()) {
    throw DimensionError(std::to_string(input.size()) + " input spatial extents for a " +
                         std::to_string(kernel.size()) + "-D kernel");
  }
  std::vector<std::size_t> out(input.size());
  for (std::size_t m = 0; m < input.size(); ++m) {
    out[m] = conv_output_extent(input[m], kernel[m], stride_at(m), padding_at(m));
  }
  return out;
}

ConvSpec ConvSpec::for_kernel(const DenseTensor& kernel, std::vector<std::size_t> stride,
                              std::vector<std::size_t> padding) {
  if (kernel.order() < 3) {
    throw DimensionError("convolution kernel must be T x C x K..., got " + shape_to_string(kernel.shape()));
  }
  ConvSpec spec{kernel.extent(1), kernel.extent(0), {kernel.shape().begin() + 2, kernel.shape().end()},
                std::move(stride), std::move(padding)};
  spec.validate();
  return spec;
}

DenseTensor conv_nd_direct(const DenseTensor& x, const DenseTensor& w, const ConvSpec& spec) {
  spec.validate();
  if (w.order() != spec.spatial_order() + 2 || w.extent(0) != spec.out_channels ||
      w.extent(1) != spec.in_channels ||
      !std::equal(spec.kernel.begin(), spec.kernel.end(), w.shape().begin() + 2)) {
    throw DimensionError("kernel shape " + shape_to_string(w.shape()) + " disagrees with the convolution spec");
  }
  check_input(x, spec);
  const auto in = spatial_extents(x);
  const auto out_sp = spec.output_extents(in);
  const std::size_t n = spec.spatial_order();
  const Taps taps = make_taps(spec, in, out_sp);

  Shape out_shape{spec.out_channels};
  out_shape.insert(out_shape.end(), out_sp.begin(), out_sp.end());
  DenseTensor out(out_shape);

  const auto& xs = x.strides();
  const std::size_t kvol = spec.kernel_volume();
  const std::size_t ovol = shape_volume(out_sp);
  auto xd = x.data();
  auto wd = w.data();
  auto od = out.data();

  std::vector<std::size_t> y(n, 0);
  std::vector<std::size_t> k(n, 0);
  for (std::size_t o = 0; o < ovol; ++o, next_index(y, out_sp)) {
    for (std::size_t t = 0; t < spec.out_channels; ++t) {
      double acc = 0.0;
      for (std::size_t c = 0; c < spec.in_channels; ++c) {
        const double* wk = wd.data() + (t * spec.in_channels + c) * kvol;
        std::fill(k.begin(), k.end(), 0);
        for (std::size_t kk = 0; kk < kvol; ++kk, next_index(k, spec.kernel)) {
          std::size_t off = c * xs[0];
          bool inside = true;
          for (std::size_t m = 0; m < n; ++m) {
            const std::ptrdiff_t q = taps.pos[m][y[m] * spec.kernel[m] + k[m]];
            if (q < 0) {
              inside = false;
              break;
            }
            off += static_cast<std::size_t>(q) * xs[m + 1];
          }
          if (inside) acc += wk[kk] * xd[off];
        }
      }
      od[t * ovol + o] = acc;
    }
  }
  return out;
}

DenseTensor conv_nd_direct(const DenseTensor& x, const DenseTensor& w) {
  return conv_nd_direct(x, w, ConvSpec::for_kernel(w));
}

DenseTensor conv_1x1(const DenseTensor& x, const DenseTensor& w2d) {
  if (w2d.order() != 2) throw DimensionError("pointwise kernel must be T x C");
  if (x.order() < 2) throw DimensionError("pointwise input must be C x spatial...");
  return n_mode_product(x, w2d, 0);
}

DenseTensor depthwise_conv_nd(const DenseTensor& x, const DenseTensor& kernels, const ConvSpec& spec) {
  spec.validate();
  const std::size_t n = spec.spatial_order();
  const std::size_t groups = spec.in_channels;
  if (spec.out_channels != groups) throw DimensionError("depthwise convolution needs in == out channels");
  if (kernels.order() != n + 1 || kernels.extent(n) != groups ||
      !std::equal(spec.kernel.begin(), spec.kernel.end(), kernels.shape().begin())) {
    throw DimensionError("depthwise kernels " + shape_to_string(kernels.shape()) +
                         " disagree with the convolution spec");
  }
  check_input(x, spec);
  const auto in = spatial_extents(x);
  const auto out_sp = spec.output_extents(in);
  const Taps taps = make_taps(spec, in, out_sp);

  Shape out_shape{groups};
  out_shape.insert(out_shape.end(), out_sp.begin(), out_sp.end());
  DenseTensor out(out_shape);

  const auto& xs = x.strides();
  const std::size_t kvol = spec.kernel_volume();
  const std::size_t ovol = shape_volume(out_sp);
  auto xd = x.data();
  auto kd = kernels.data();
  auto od = out.data();

  std::vector<std::size_t> y(n, 0);
  std::vector<std::size_t> k(n, 0);
  for (std::size_t o = 0; o < ovol; ++o, next_index(y, out_sp)) {
    for (std::size_t g = 0; g < groups; ++g) {
      double acc = 0.0;
      std::fill(k.begin(), k.end(), 0);
      for (std::size_t kk = 0; kk < kvol; ++kk, next_index(k, spec.kernel)) {
        std::size_t off = g * xs[0];
        bool inside = true;
        for (std::size_t m = 0; m < n; ++m) {
          const std::ptrdiff_t q = taps.pos[m][y[m] * spec.kernel[m] + k[m]];
          if (q < 0) {
            inside = false;
            break;
          }
          off += static_cast<std::size_t>(q) * xs[m + 1];
        }
        if (inside) acc += kd[kk * groups + g] * xd[off];
      }
      od[g * ovol + o] = acc;
    }
  }
  return out;
}

}  // namespace tfconv
