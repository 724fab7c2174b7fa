#include <string>

#include "tfconv/decomp.hpp"
#include "tfconv/error.hpp"
#include "tfconv/multilinear.hpp"

namespace tfconv {

std::size_t KruskalTensor::rank() const { return factors.empty() ? 0 : factors.front().extent(1); }

Shape KruskalTensor::shape() const {
  Shape s;
  for (const auto& f : factors) s.push_back(f.extent(0));
  return s;
}

void KruskalTensor::validate() const {
  if (factors.empty()) throw DimensionError("Kruskal tensor has no factors");
  const std::size_t r = factors.front().order() == 2 ? factors.front().extent(1) : 0;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto& f = factors[k];
    if (f.order() != 2) throw DimensionError("Kruskal factor " + std::to_string(k) + " is not 2-D");
    if (f.extent(1) != r) {
      throw DimensionError("Kruskal factor " + std::to_string(k) + " has " + std::to_string(f.extent(1)) +
                           " columns, expected rank " + std::to_string(r));
    }
  }
}

Shape TuckerTensor::shape() const {
  Shape s;
  for (const auto& f : factors) s.push_back(f.extent(0));
  return s;
}

void TuckerTensor::validate() const {
  if (factors.size() != core.order()) {
    throw DimensionError("Tucker core of order " + std::to_string(core.order()) + " with " +
                         std::to_string(factors.size()) + " factors");
  }
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto& f = factors[k];
    if (f.order() != 2) throw DimensionError("Tucker factor " + std::to_string(k) + " is not 2-D");
    if (f.extent(1) != core.extent(k)) {
      throw DimensionError("Tucker factor " + std::to_string(k) + " has " + std::to_string(f.extent(1)) +
                           " columns but core extent is " + std::to_string(core.extent(k)));
    }
  }
}

DenseTensor kruskal_to_dense(const KruskalTensor& k) {
  k.validate();
  const Shape shape = k.shape();
  const std::size_t rank = k.rank();
  const std::size_t order = shape.size();
  DenseTensor out(shape);
  auto dst = out.data();

  // Odometer over output entries. prefix[m * rank + r] holds the product of
  // factors 0..m at the current index, so only modes that changed are
  // recomputed; the sum over r runs in increasing order.
  std::vector<const double*> f(order);
  for (std::size_t m = 0; m < order; ++m) f[m] = k.factors[m].data().data();
  std::vector<double> prefix(order * rank);
  std::vector<std::size_t> idx(order, 0);
  std::size_t dirty = 0;
  for (std::size_t off = 0; off < dst.size(); ++off) {
    for (std::size_t m = dirty; m < order; ++m) {
      const double* row = f[m] + idx[m] * rank;
      double* p = prefix.data() + m * rank;
      const double* prev = m == 0 ? nullptr : p - rank;
      for (std::size_t r = 0; r < rank; ++r) p[r] = m == 0 ? row[r] : prev[r] * row[r];
    }
    const double* last = prefix.data() + (order - 1) * rank;
    double acc = 0.0;
    for (std::size_t r = 0; r < rank; ++r) acc += last[r];
    dst[off] = acc;
    for (std::size_t m = order; m-- > 0;) {
      dirty = m;
      if (++idx[m] < shape[m]) break;
      idx[m] = 0;
    }
  }
  return out;
}

DenseTensor tucker_to_dense(const TuckerTensor& t) {
  t.validate();
  DenseTensor out = t.core;
  for (std::size_t m = 0; m < t.factors.size(); ++m) out = n_mode_product(out, t.factors[m], m);
  return out;
}

TuckerTensor absorb_spatial(const TuckerTensor& t, std::vector<std::size_t> spatial_modes) {
  t.validate();
  if (spatial_modes.empty()) {
    for (std::size_t m = 2; m < t.order(); ++m) spatial_modes.push_back(m);
  }
  TuckerTensor out = t;
  for (std::size_t m : spatial_modes) {
    if (m >= t.order()) {
      throw DimensionError("spatial mode " + std::to_string(m) + " out of range for order " +
                           std::to_string(t.order()));
    }
    out.core = n_mode_product(out.core, t.factors[m], m);
    out.factors[m] = DenseTensor::identity(t.factors[m].extent(0));
  }
  return out;
}

DenseTensor merge_spatial(const KruskalTensor& k) {
  k.validate();
  if (k.order() < 3) {
    throw DimensionError("merging spatial factors needs a kernel with at least one spatial mode");
  }
  const std::size_t rank = k.rank();
  Shape shape;
  for (std::size_t m = 2; m < k.order(); ++m) shape.push_back(k.factors[m].extent(0));
  const std::size_t spatial_order = shape.size();
  shape.push_back(rank);
  DenseTensor out(shape);
  auto dst = out.data();

  std::vector<std::size_t> idx(spatial_order, 0);
  const std::size_t positions = dst.size() / rank;
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t r = 0; r < rank; ++r) {
      double v = 1.0;
      for (std::size_t m = 0; m < spatial_order; ++m) v *= k.factors[m + 2](idx[m], r);
      dst[p * rank + r] = v;
    }
    for (std::size_t m = spatial_order; m-- > 0;) {
      if (++idx[m] < shape[m]) break;
      idx[m] = 0;
    }
  }
  return out;
}

MergedFactors merge_spatial_factors(const KruskalTensor& k) {
  k.validate();
  if (k.order() < 3) {
    throw DimensionError("merging spatial factors needs a kernel with at least one spatial mode");
  }
  const std::size_t channels = k.factors[1].extent(0);
  if (k.rank() != channels) {
    throw PreconditionError("depthwise-separable merge needs rank == input channels, got rank " +
                            std::to_string(k.rank()) + " and " + std::to_string(channels) + " channels");
  }
  return {matmul(k.factors[0], transpose(k.factors[1])), merge_spatial(k)};
}

}  // namespace tfconv
