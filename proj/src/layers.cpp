#include "tfconv/layers.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tfconv/error.hpp"
#include "tfconv/multilinear.hpp"

namespace tfconv {

namespace {

ConvSpec spec_from(std::size_t in, std::size_t out, std::vector<std::size_t> kernel,
                   std::vector<std::size_t> stride, std::vector<std::size_t> padding) {
  ConvSpec spec{in, out, std::move(kernel), std::move(stride), std::move(padding)};
  spec.validate();
  return spec;
}

void check_input(const ConvSpec& spec, const DenseTensor& x) {
  if (x.order() != spec.spatial_order() + 1) {
    throw DimensionError("input of shape " + shape_to_string(x.shape()) + " for a " +
                         std::to_string(spec.spatial_order()) + "-D layer");
  }
  if (x.extent(0) != spec.in_channels) {
    throw DimensionError("input has " + std::to_string(x.extent(0)) + " channels, layer expects " +
                         std::to_string(spec.in_channels));
  }
}

void require_shape(const DenseTensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw DimensionError(std::string(what) + " has shape " + shape_to_string(t.shape()) + ", expected " +
                         shape_to_string(expected));
  }
}

Shape spatial_then(const ConvSpec& spec, std::size_t last) {
  Shape s = spec.kernel;
  s.push_back(last);
  return s;
}

// Stages shared by the CP and higher-order CP forwards.
DenseTensor contract_input(const CpConvLayer& layer, const DenseTensor& x) {
  return n_mode_product(x, transpose(layer.input_factor()), 0);
}

DenseTensor spatial_stage(const CpConvLayer& layer, const DenseTensor& h, std::size_t mode) {
  return grouped_mode_conv_1d(h, layer.spatial_factor(mode), mode + 1, layer.spec.stride_at(mode),
                              layer.spec.padding_at(mode));
}

DenseTensor project_output(const CpConvLayer& layer, const DenseTensor& h) {
  return n_mode_product(h, layer.output_factor(), 0);
}

}  // namespace

bool preserves_extents(const ConvSpec& spec) {
  for (std::size_t m = 0; m < spec.spatial_order(); ++m) {
    if (spec.stride_at(m) != 1) return false;
    if (spec.kernel[m] % 2 == 0 || 2 * spec.padding_at(m) != spec.kernel[m] - 1) return false;
  }
  return true;
}

CpConvLayer CpConvLayer::from_kruskal(KruskalTensor k, std::vector<std::size_t> stride,
                                      std::vector<std::size_t> padding) {
  k.validate();
  if (k.order() < 3) {
    throw DimensionError("CP convolution kernel needs T, C and at least one spatial factor");
  }
  const Shape shape = k.shape();
  CpConvLayer layer{std::move(k), spec_from(shape[1], shape[0], {shape.begin() + 2, shape.end()},
                                            std::move(stride), std::move(padding))};
  return layer;
}

void CpConvLayer::validate() const {
  kruskal.validate();
  spec.validate();
  Shape expected{spec.out_channels, spec.in_channels};
  expected.insert(expected.end(), spec.kernel.begin(), spec.kernel.end());
  if (kruskal.shape() != expected) {
    throw DimensionError("CP factors " + shape_to_string(kruskal.shape()) + " disagree with layer geometry " +
                         shape_to_string(expected));
  }
}

TuckerConvLayer TuckerConvLayer::from_tucker(const TuckerTensor& t, std::vector<std::size_t> stride,
                                             std::vector<std::size_t> padding) {
  t.validate();
  if (t.order() < 3) throw DimensionError("Tucker convolution kernel needs T, C and spatial modes");
  const TuckerTensor absorbed = absorb_spatial(t);
  const Shape shape = t.shape();
  TuckerConvLayer layer{transpose(absorbed.factors[1]), absorbed.core, absorbed.factors[0],
                        spec_from(shape[1], shape[0], {shape.begin() + 2, shape.end()}, std::move(stride),
                                  std::move(padding))};
  layer.validate();
  return layer;
}

void TuckerConvLayer::validate() const {
  spec.validate();
  if (down.order() != 2 || up.order() != 2 || core.order() != spec.spatial_order() + 2) {
    throw DimensionError("Tucker layer factors have the wrong order");
  }
  Shape core_shape{up.extent(1), down.extent(0)};
  core_shape.insert(core_shape.end(), spec.kernel.begin(), spec.kernel.end());
  require_shape(down, {down.extent(0), spec.in_channels}, "Tucker down-projection");
  require_shape(up, {spec.out_channels, up.extent(1)}, "Tucker up-projection");
  require_shape(core, core_shape, "Tucker core");
}

void HoCpConvLayer::validate() const {
  cp.validate();
  if (!activations.empty() && activations.size() != cp.spec.spatial_order()) {
    throw PreconditionError("expected one activation stage per spatial mode (" +
                            std::to_string(cp.spec.spatial_order()) + "), got " +
                            std::to_string(activations.size()));
  }
  if (skip) {
    require_shape(*skip, {cp.spec.out_channels, cp.spec.in_channels}, "skip factor");
    if (!preserves_extents(cp.spec)) {
      throw PreconditionError("skip connection needs stride 1 and same padding ((K - 1) / 2, odd K)");
    }
  }
}

void MobileNetV1Block::validate() const {
  spec.validate();
  require_shape(spatial, spatial_then(spec, spec.in_channels), "MobileNet-v1 spatial factor");
  require_shape(pointwise, {spec.out_channels, spec.in_channels}, "MobileNet-v1 pointwise factor");
}

double MobileNetV2Block::expansion() const {
  return static_cast<double>(rank()) / static_cast<double>(spec.in_channels);
}

void MobileNetV2Block::validate() const {
  spec.validate();
  if (down.order() != 2) throw DimensionError("MobileNet-v2 down-projection must be 2-D");
  const std::size_t r = down.extent(0);
  require_shape(down, {r, spec.in_channels}, "MobileNet-v2 down-projection");
  require_shape(spatial, spatial_then(spec, r), "MobileNet-v2 spatial factor");
  require_shape(up, {spec.out_channels, r}, "MobileNet-v2 up-projection");
}

MobileNetV1Block build_mobilenet_v1(const KruskalTensor& k, std::vector<std::size_t> stride,
                                    std::vector<std::size_t> padding) {
  MergedFactors merged = merge_spatial_factors(k);
  const Shape shape = k.shape();
  MobileNetV1Block block{std::move(merged.spatial), std::move(merged.pointwise),
                         spec_from(shape[1], shape[0], {shape.begin() + 2, shape.end()}, std::move(stride),
                                   std::move(padding))};
  block.validate();
  return block;
}

MobileNetV2Block build_mobilenet_v2(const KruskalTensor& k, std::vector<std::size_t> stride,
                                    std::vector<std::size_t> padding) {
  k.validate();
  const Shape shape = k.shape();
  MobileNetV2Block block{transpose(k.factors[1]), merge_spatial(k), k.factors[0],
                         spec_from(shape[1], shape[0], {shape.begin() + 2, shape.end()}, std::move(stride),
                                   std::move(padding))};
  block.validate();
  return block;
}

DenseTensor cp_conv_forward(const CpConvLayer& layer, const DenseTensor& x) {
  std::vector<std::size_t> order(layer.spec.spatial_order());
  std::iota(order.begin(), order.end(), 0);
  return cp_conv_forward(layer, x, order);
}

DenseTensor cp_conv_forward(const CpConvLayer& layer, const DenseTensor& x, std::span<const std::size_t> mode_order) {
  layer.validate();
  check_input(layer.spec, x);
  std::vector<std::size_t> sorted(mode_order.begin(), mode_order.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted.size() != layer.spec.spatial_order() || sorted[i] != i) {
      throw PreconditionError("spatial mode order must be a permutation of 0.." +
                              std::to_string(layer.spec.spatial_order() - 1));
    }
  }
  DenseTensor h = contract_input(layer, x);
  for (std::size_t m : mode_order) h = spatial_stage(layer, h, m);
  return project_output(layer, h);
}

DenseTensor tucker_conv_forward(const TuckerConvLayer& layer, const DenseTensor& x) {
  layer.validate();
  check_input(layer.spec, x);
  const DenseTensor reduced = n_mode_product(x, layer.down, 0);
  ConvSpec inner = layer.spec;
  inner.in_channels = layer.core.extent(1);
  inner.out_channels = layer.core.extent(0);
  const DenseTensor mixed = conv_nd_direct(reduced, layer.core, inner);
  return n_mode_product(mixed, layer.up, 0);
}

DenseTensor ho_cp_conv_forward(const HoCpConvLayer& layer, const DenseTensor& x) {
  layer.validate();
  const CpConvLayer& cp = layer.cp;
  check_input(cp.spec, x);
  DenseTensor h = contract_input(cp, x);
  for (std::size_t m = 0; m < cp.spec.spatial_order(); ++m) {
    h = spatial_stage(cp, h, m);
    if (!layer.activations.empty()) apply_stage(h, layer.activations[m]);
  }
  h = project_output(cp, h);
  if (layer.skip) {
    DenseTensor shortcut = n_mode_product(x, *layer.skip, 0);
    if (shortcut.shape() != h.shape()) {
      throw PreconditionError("skip path shape " + shape_to_string(shortcut.shape()) + " vs output " +
                              shape_to_string(h.shape()));
    }
    h = h + shortcut;
  }
  return h;
}

DenseTensor mobilenet_v1_forward(const MobileNetV1Block& block, const DenseTensor& x) {
  block.validate();
  check_input(block.spec, x);
  ConvSpec depthwise = block.spec;
  depthwise.out_channels = depthwise.in_channels;
  return n_mode_product(depthwise_conv_nd(x, block.spatial, depthwise), block.pointwise, 0);
}

DenseTensor mobilenet_v2_forward(const MobileNetV2Block& block, const DenseTensor& x) {
  block.validate();
  check_input(block.spec, x);
  ConvSpec depthwise = block.spec;
  depthwise.in_channels = depthwise.out_channels = block.rank();
  const DenseTensor expanded = n_mode_product(x, block.down, 0);
  return n_mode_product(depthwise_conv_nd(expanded, block.spatial, depthwise), block.up, 0);
}

DenseTensor dense_kernel(const CpConvLayer& layer) { return kruskal_to_dense(layer.kruskal); }

DenseTensor dense_kernel(const TuckerConvLayer& layer) {
  layer.validate();
  return n_mode_product(n_mode_product(layer.core, layer.up, 0), transpose(layer.down), 1);
}

DenseTensor dense_kernel(const HoCpConvLayer& layer) { return dense_kernel(layer.cp); }

DenseTensor dense_kernel(const MobileNetV1Block& block) {
  block.validate();
  const std::size_t t_out = block.spec.out_channels;
  const std::size_t c_in = block.spec.in_channels;
  const std::size_t kvol = block.spec.kernel_volume();
  Shape shape{t_out, c_in};
  shape.insert(shape.end(), block.spec.kernel.begin(), block.spec.kernel.end());
  DenseTensor w(shape);
  auto wd = w.data();
  auto sd = block.spatial.data();
  for (std::size_t t = 0; t < t_out; ++t)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t k = 0; k < kvol; ++k) wd[(t * c_in + c) * kvol + k] = block.pointwise(t, c) * sd[k * c_in + c];
  return w;
}

DenseTensor dense_kernel(const MobileNetV2Block& block) {
  block.validate();
  const std::size_t t_out = block.spec.out_channels;
  const std::size_t c_in = block.spec.in_channels;
  const std::size_t r_len = block.rank();
  const std::size_t kvol = block.spec.kernel_volume();
  Shape shape{t_out, c_in};
  shape.insert(shape.end(), block.spec.kernel.begin(), block.spec.kernel.end());
  DenseTensor w(shape);
  auto wd = w.data();
  auto sd = block.spatial.data();
  for (std::size_t t = 0; t < t_out; ++t)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t k = 0; k < kvol; ++k) {
        double acc = 0.0;
        for (std::size_t r = 0; r < r_len; ++r) acc += block.up(t, r) * block.down(r, c) * sd[k * r_len + r];
        wd[(t * c_in + c) * kvol + k] = acc;
      }
  return w;
}

}  // namespace tfconv
