#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>
#include <string>

#include "eigen_bridge.hpp"
#include "tfconv/decomp.hpp"
#include "tfconv/error.hpp"
#include "tfconv/multilinear.hpp"

namespace tfconv {

namespace {

using detail::RowMatrix;

// Errors below this are indistinguishable from rounding; iteration stops.
constexpr double kErrorFloor = 1e-15;

// V is a Hadamard product of Gram matrices, hence symmetric positive
// semi-definite; its eigenvalues are its singular values.
RowMatrix pinv_symmetric(const RowMatrix& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  const auto& lambda = eig.eigenvalues();
  const double largest = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  const double cutoff = kPinvCutoff * largest;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (std::abs(lambda(i)) > cutoff) inv(i) = 1.0 / lambda(i);
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

DenseTensor leading_left_vectors(const DenseTensor& unfolding, std::size_t count, std::mt19937_64& rng) {
  const RowMatrix m = detail::to_eigen(unfolding);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto available = static_cast<std::size_t>(svd.matrixU().cols());
  DenseTensor out = random_uniform({unfolding.extent(0), count}, rng);
  for (std::size_t r = 0; r < std::min(count, available); ++r)
    for (std::size_t i = 0; i < unfolding.extent(0); ++i)
      out(i, r) = svd.matrixU()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
  return out;
}

// Scales every column to unit norm; zero columns are left alone.
void normalize_columns(DenseTensor& f) {
  const std::size_t rows = f.extent(0);
  const std::size_t cols = f.extent(1);
  for (std::size_t r = 0; r < cols; ++r) {
    double n = 0.0;
    for (std::size_t i = 0; i < rows; ++i) n += f(i, r) * f(i, r);
    n = std::sqrt(n);
    if (n == 0.0) continue;
    for (std::size_t i = 0; i < rows; ++i) f(i, r) /= n;
  }
}

}  // namespace

CpResult cp_als(const DenseTensor& t, std::size_t rank, const CpAlsOptions& options) {
  if (rank == 0) throw PreconditionError("CP rank must be >= 1");
  if (t.order() < 2) throw PreconditionError("CP-ALS needs a tensor of order >= 2");
  const std::size_t order = t.order();

  std::vector<bool> fixed(order, false);
  for (std::size_t m : options.fixed_modes) {
    if (m >= order) throw PreconditionError("fixed mode " + std::to_string(m) + " out of range");
    fixed[m] = true;
  }
  if (!options.fixed_modes.empty() && !options.initial) {
    throw PreconditionError("fixed CP modes need an initial Kruskal tensor");
  }

  std::mt19937_64 rng(options.seed);
  CpResult result;
  KruskalTensor& k = result.kruskal;
  if (options.initial) {
    k = *options.initial;
    k.validate();
    if (k.rank() != rank || k.shape() != t.shape()) {
      throw PreconditionError("initial Kruskal tensor " + shape_to_string(k.shape()) + " rank " +
                              std::to_string(k.rank()) + " does not match target " +
                              shape_to_string(t.shape()) + " rank " + std::to_string(rank));
    }
  } else {
    for (std::size_t m = 0; m < order; ++m) {
      if (options.init == CpInit::Hosvd) {
        k.factors.push_back(leading_left_vectors(unfold(t, m), rank, rng));
      } else {
        k.factors.push_back(random_uniform({t.extent(m), rank}, rng));
      }
    }
  }

  if (t.frobenius_norm() == 0.0) {
    for (std::size_t m = 0; m < order; ++m)
      if (!fixed[m]) k.factors[m] = DenseTensor({t.extent(m), rank});
    result.rel_error = 0.0;
    result.converged = true;
    result.error_history = {0.0};
    return result;
  }

  std::size_t last_free = order;
  for (std::size_t m = 0; m < order; ++m)
    if (!fixed[m]) last_free = m;

  std::vector<DenseTensor> unfoldings;
  unfoldings.reserve(order);
  for (std::size_t m = 0; m < order; ++m) unfoldings.push_back(unfold(t, m));

  double err = relative_error(kruskal_to_dense(k), t);
  result.error_history.push_back(err);
  KruskalTensor best = k;
  double best_err = err;

  if (last_free == order || err <= kErrorFloor) {
    result.rel_error = err;
    result.converged = true;
    return result;
  }

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    for (std::size_t n = 0; n < order; ++n) {
      if (fixed[n]) continue;
      DenseTensor v = DenseTensor::filled({rank, rank}, 1.0);
      std::vector<DenseTensor> others;
      for (std::size_t m = 0; m < order; ++m) {
        if (m == n) continue;
        v = hadamard(v, gram(k.factors[m]));
        others.push_back(k.factors[m]);
      }
      const DenseTensor mttkrp = matmul(unfoldings[n], khatri_rao(others));
      const RowMatrix solved = detail::to_eigen(mttkrp) * pinv_symmetric(detail::to_eigen(v));
      k.factors[n] = detail::from_eigen(solved);
      // Scale accumulates in the last free factor.
      if (n != last_free) normalize_columns(k.factors[n]);
    }
    const double prev = err;
    err = relative_error(kruskal_to_dense(k), t);
    result.error_history.push_back(err);
    result.iterations = it + 1;
    // Each block update is an exact least-squares minimiser; the slack
    // covers rounding once the fit is at machine precision.
    assert(err <= prev * (1.0 + 1e-8) + 1e-12);
    if (err < best_err) {
      best_err = err;
      best = k;
    }
    if (std::abs(prev - err) <= options.tol * prev || err <= kErrorFloor) {
      result.converged = true;
      break;
    }
  }

  result.kruskal = std::move(best);
  result.rel_error = best_err;
  return result;
}

}  // namespace tfconv
