#include <cmath>
#include <string>

#include "eigen_bridge.hpp"
#include "tfconv/decomp.hpp"
#include "tfconv/error.hpp"
#include "tfconv/multilinear.hpp"

namespace tfconv {

namespace {

constexpr double kErrorFloor = 1e-15;

// Leading `count` left singular vectors. The full U is requested so that
// `count` may exceed the column count of the unfolding; the extra columns
// complete an orthonormal basis.
DenseTensor leading_subspace(const DenseTensor& unfolding, std::size_t count) {
  const detail::RowMatrix m = detail::to_eigen(unfolding);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  return detail::from_eigen(svd.matrixU().leftCols(static_cast<Eigen::Index>(count)));
}

DenseTensor project_all_but(const DenseTensor& t, const std::vector<DenseTensor>& factors, std::size_t skip) {
  DenseTensor y = t;
  for (std::size_t m = 0; m < factors.size(); ++m)
    if (m != skip) y = n_mode_product(y, transpose(factors[m]), m);
  return y;
}

}  // namespace

TuckerResult tucker_hooi(const DenseTensor& t, const std::vector<std::size_t>& ranks, const TuckerOptions& options) {
  const std::size_t order = t.order();
  if (ranks.size() != order) {
    throw PreconditionError("Tucker needs one rank per mode: got " + std::to_string(ranks.size()) +
                            " ranks for a tensor of order " + std::to_string(order));
  }
  TuckerResult result;
  std::vector<std::size_t> capped = ranks;
  for (std::size_t m = 0; m < order; ++m) {
    if (capped[m] == 0) throw PreconditionError("Tucker rank at mode " + std::to_string(m) + " must be >= 1");
    if (capped[m] > t.extent(m)) {
      result.warnings.push_back("rank " + std::to_string(capped[m]) + " at mode " + std::to_string(m) +
                                " capped at extent " + std::to_string(t.extent(m)));
      capped[m] = t.extent(m);
    }
  }

  std::vector<DenseTensor> factors;
  factors.reserve(order);
  for (std::size_t m = 0; m < order; ++m) factors.push_back(leading_subspace(unfold(t, m), capped[m]));

  auto assemble = [&](const std::vector<DenseTensor>& fs) {
    TuckerTensor tt{project_all_but(t, fs, order), fs};
    return tt;
  };

  result.tucker = assemble(factors);
  double err = relative_error(tucker_to_dense(result.tucker), t);
  result.error_history.push_back(err);

  for (std::size_t it = 0; it < options.max_iters && err > kErrorFloor; ++it) {
    for (std::size_t n = 0; n < order; ++n) {
      factors[n] = leading_subspace(unfold(project_all_but(t, factors, n), n), capped[n]);
    }
    TuckerTensor next = assemble(factors);
    const double prev = err;
    const double next_err = relative_error(tucker_to_dense(next), t);
    result.error_history.push_back(next_err);
    result.iterations = it + 1;
    if (next_err <= err) {
      result.tucker = std::move(next);
      err = next_err;
    }
    if (std::abs(prev - next_err) <= options.tol * prev) break;
  }
  result.rel_error = err;
  return result;
}

}  // namespace tfconv
