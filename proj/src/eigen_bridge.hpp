#pragma once

#include <Eigen/Dense>

#include "tfconv/tensor.hpp"

namespace tfconv::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline RowMatrix to_eigen(const DenseTensor& m) {
  return Eigen::Map<const RowMatrix>(m.data().data(), static_cast<Eigen::Index>(m.extent(0)),
                                     static_cast<Eigen::Index>(m.extent(1)));
}

inline DenseTensor from_eigen(const RowMatrix& m) {
  DenseTensor out({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMatrix>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

}  // namespace tfconv::detail
