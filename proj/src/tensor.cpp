#include "tfconv/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "tfconv/error.hpp"

namespace tfconv {

std::size_t shape_volume(std::span<const std::size_t> shape) {
  std::size_t v = 1;
  for (auto e : shape) v *= e;
  return v;
}

std::string shape_to_string(std::span<const std::size_t> shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace {

std::vector<std::size_t> row_major_strides(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size());
  std::size_t s = 1;
  for (std::size_t k = shape.size(); k-- > 0;) {
    strides[k] = s;
    s *= shape[k];
  }
  return strides;
}

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor order must be >= 1");
  for (auto e : shape)
    if (e == 0) throw DimensionError("tensor extents must be >= 1, got " + shape_to_string(shape));
}

}  // namespace

DenseTensor::DenseTensor() : DenseTensor(Shape{1}) {}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  strides_ = row_major_strides(shape_);
  data_.assign(shape_volume(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_volume(shape_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
  }
  strides_ = row_major_strides(shape_);
}

DenseTensor DenseTensor::filled(Shape shape, double value) {
  DenseTensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

DenseTensor DenseTensor::identity(std::size_t n) {
  DenseTensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

DenseTensor DenseTensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseTensor({r, c}, std::move(data));
}

DenseTensor DenseTensor::vector(std::initializer_list<double> values) {
  return DenseTensor({values.size()}, std::vector<double>(values));
}

std::size_t DenseTensor::extent(std::size_t mode) const {
  if (mode >= shape_.size()) {
    throw DimensionError("mode " + std::to_string(mode) + " out of range for order " +
                         std::to_string(shape_.size()));
  }
  return shape_[mode];
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw DimensionError("index of length " + std::to_string(index.size()) + " for tensor of order " +
                         std::to_string(shape_.size()));
  }
  std::size_t off = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= shape_[k]) throw DimensionError("index out of range at mode " + std::to_string(k));
    off += index[k] * strides_[k];
  }
  return off;
}

DenseTensor DenseTensor::reshaped(Shape shape) const { return DenseTensor(std::move(shape), data_); }

double DenseTensor::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool DenseTensor::operator==(const DenseTensor& other) const {
  return shape_ == other.shape_ &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

namespace {

void require_same_shape(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

}  // namespace

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b);
  DenseTensor r = a;
  auto rd = r.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < rd.size(); ++i) rd[i] += bd[i];
  return r;
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b);
  DenseTensor r = a;
  auto rd = r.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < rd.size(); ++i) rd[i] -= bd[i];
  return r;
}

DenseTensor operator*(double s, const DenseTensor& a) {
  DenseTensor r = a;
  for (double& v : r.data()) v *= s;
  return r;
}

double relative_error(const DenseTensor& value, const DenseTensor& reference) {
  require_same_shape(value, reference);
  const double diff = (value - reference).frobenius_norm();
  const double ref = reference.frobenius_norm();
  return ref > 0.0 ? diff / ref : diff;
}

DenseTensor random_uniform(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  DenseTensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

DenseTensor random_normal(Shape shape, std::mt19937_64& rng) {
  DenseTensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace tfconv
