#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tfconv {

using Shape = std::vector<std::size_t>;

std::size_t shape_volume(std::span<const std::size_t> shape);
std::string shape_to_string(std::span<const std::size_t> shape);

// Dense row-major N-dimensional array of doubles.
//
// Every extent is >= 1 and the order is >= 1, so a default-constructed
// tensor is the single zero element of shape {1}.
class DenseTensor {
 public:
  DenseTensor();
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> data);

  static DenseTensor filled(Shape shape, double value);
  static DenseTensor identity(std::size_t n);
  // 2-D convenience for literals: matrix({{1, 2}, {3, 4}}).
  static DenseTensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static DenseTensor vector(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t extent(std::size_t mode) const;
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::size_t offset(std::span<const std::size_t> index) const;
  double& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
  double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }

  template <typename... I>
  double& operator()(I... index) {
    const std::size_t idx[] = {static_cast<std::size_t>(index)...};
    return at(idx);
  }
  template <typename... I>
  double operator()(I... index) const {
    const std::size_t idx[] = {static_cast<std::size_t>(index)...};
    return at(idx);
  }

  // Same data, new shape of equal volume.
  DenseTensor reshaped(Shape shape) const;

  double frobenius_norm() const;

  // Element-wise equality of shape and bits of the payload.
  bool operator==(const DenseTensor& other) const;

 private:
  Shape shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double s, const DenseTensor& a);

// ||a - b||_F / ||reference||_F; falls back to the absolute difference when
// the reference is exactly zero.
double relative_error(const DenseTensor& value, const DenseTensor& reference);

DenseTensor random_uniform(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0);
DenseTensor random_normal(Shape shape, std::mt19937_64& rng);

}  // namespace tfconv
