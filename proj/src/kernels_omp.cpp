#include <algorithm>
#include <numeric>

#include <omp.h>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/kernels.hpp"

namespace rthresh::kernels::parallel {

namespace {

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

// Sums per-block partials in block order.
MatrixXd ordered_sum(const std::vector<MatrixXd>& parts, Eigen::Index rows, Eigen::Index cols) {
    MatrixXd total = MatrixXd::Zero(rows, cols);
    for (const auto& p : parts) total += p;
    return total;
}

}  // namespace

void per_sample_losses(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                       const MatrixXd& Y, std::span<double> out) {
    const auto n = static_cast<std::size_t>(X.cols());
    const std::size_t nb = block_count(n);
    const Eigen::Index K = W.rows();
#pragma omp parallel for schedule(static) if (nb > 1 && !omp_in_parallel())
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        const auto lo = static_cast<Eigen::Index>(static_cast<std::size_t>(b) * kBlock);
        const auto m = static_cast<Eigen::Index>(std::min(n, static_cast<std::size_t>(lo) + kBlock)) - lo;
        const MatrixXd Z = W * X.middleCols(lo, m);
        for (Eigen::Index c = 0; c < m; ++c) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < K; ++k) {
                const double r = act_value(act, Z(k, c)) - Y(k, lo + c);
                acc += r * r;
            }
            out[static_cast<std::size_t>(lo + c)] = acc;
        }
    }
}

MatrixXd weighted_gradient(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                           const MatrixXd& Y, std::span<const std::size_t> idx, double scale) {
    // Blocks run over sample positions; samples outside idx get a zero
    // coefficient, so whole column blocks feed a dense product.
    const auto n = static_cast<std::size_t>(X.cols());
    const std::size_t nb = block_count(n);
    const Eigen::Index K = W.rows();
    std::vector<char> selected(n, 0);
    for (std::size_t i : idx) selected[i] = 1;
    std::vector<MatrixXd> parts(nb, MatrixXd::Zero(K, W.cols()));
#pragma omp parallel for schedule(static) if (nb > 1 && !omp_in_parallel())
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        const auto lo = static_cast<Eigen::Index>(static_cast<std::size_t>(b) * kBlock);
        const auto m = static_cast<Eigen::Index>(std::min(n, static_cast<std::size_t>(lo) + kBlock)) - lo;
        MatrixXd coef = W * X.middleCols(lo, m);
        for (Eigen::Index c = 0; c < m; ++c) {
            const bool keep = selected[static_cast<std::size_t>(lo + c)] != 0;
            for (Eigen::Index k = 0; k < K; ++k) {
                const double z = coef(k, c);
                coef(k, c) = keep ? (act_value(act, z) - Y(k, lo + c)) * act_deriv(act, z) : 0.0;
            }
        }
        parts[static_cast<std::size_t>(b)].noalias() = coef * X.middleCols(lo, m).transpose();
    }
    return scale * ordered_sum(parts, K, W.cols());
}

MatrixXd second_moment(const MatrixXd& X, std::span<const std::size_t> idx) {
    const std::size_t nb = block_count(idx.size());
    const Eigen::Index d = X.rows();
    std::vector<MatrixXd> parts(nb, MatrixXd::Zero(d, d));
#pragma omp parallel for schedule(static) if (nb > 1 && !omp_in_parallel())
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = std::min(idx.size(), lo + kBlock);
        MatrixXd block(d, static_cast<Eigen::Index>(hi - lo));
        for (std::size_t j = lo; j < hi; ++j)
            block.col(static_cast<Eigen::Index>(j - lo)) = X.col(static_cast<Eigen::Index>(idx[j]));
        parts[static_cast<std::size_t>(b)].noalias() = block * block.transpose();
    }
    MatrixXd m = ordered_sum(parts, d, d);
    return idx.empty() ? m : MatrixXd(m / static_cast<double>(idx.size()));
}

std::vector<std::size_t> smallest_k(std::span<const double> zeta, std::size_t k) {
    const std::size_t n = zeta.size();
    std::vector<std::size_t> out;
    if (k == 0) return out;
    if (k >= n) {
        out.resize(n);
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    // Lexicographic (value, index) order reproduces the stable-sort tie rule,
    // so the k smallest are exactly the entries not above the k-th one.
    std::vector<std::pair<double, std::size_t>> keyed(n);
    for (std::size_t i = 0; i < n; ++i) keyed[i] = {zeta[i], i};
    std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k - 1), keyed.end());
    const auto pivot = keyed[k - 1];
    out.reserve(k);
    for (std::size_t i = 0; i < n; ++i)
        if (zeta[i] < pivot.first || (zeta[i] == pivot.first && i <= pivot.second)) out.push_back(i);
    return out;
}

}  // namespace rthresh::kernels::parallel
