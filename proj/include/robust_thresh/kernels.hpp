#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "robust_thresh/types.hpp"

// Data-parallel inner loops of the estimators. `serial` is the plain
// reference; `parallel` is the OpenMP version. Parallel reductions sum
// fixed-size blocks in block order, so their output does not depend on the
// thread count (it may differ from `serial` in the last few ulps).
namespace rthresh::kernels {

inline constexpr std::size_t kBlock = 512;

namespace serial {

// zeta_i = || sigma(W x_i) - y_i ||^2 written to out (length N).
void per_sample_losses(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                       const MatrixXd& Y, std::span<double> out);

// scale * sum_{i in idx} (sigma(W x_i) - y_i) o sigma'(W x_i) x_i^T   (K x d)
MatrixXd weighted_gradient(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                           const MatrixXd& Y, std::span<const std::size_t> idx, double scale);

// (1/|idx|) sum_{i in idx} x_i x_i^T
MatrixXd second_moment(const MatrixXd& X, std::span<const std::size_t> idx);

// Indices of the k smallest entries, ties to the lower index, returned sorted.
std::vector<std::size_t> smallest_k(std::span<const double> zeta, std::size_t k);

}  // namespace serial

namespace parallel {

void per_sample_losses(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                       const MatrixXd& Y, std::span<double> out);
MatrixXd weighted_gradient(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                           const MatrixXd& Y, std::span<const std::size_t> idx, double scale);
MatrixXd second_moment(const MatrixXd& X, std::span<const std::size_t> idx);
// Same contract as serial::smallest_k via selection instead of a full sort.
std::vector<std::size_t> smallest_k(std::span<const double> zeta, std::size_t k);

}  // namespace parallel

}  // namespace rthresh::kernels
