#include <algorithm>
#include <numeric>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/kernels.hpp"

namespace rthresh::kernels::serial {

void per_sample_losses(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                       const MatrixXd& Y, std::span<double> out) {
    const Eigen::Index n = X.cols();
    const Eigen::Index K = W.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            const double r = act_value(act, W.row(k).dot(X.col(i))) - Y(k, i);
            acc += r * r;
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
}

MatrixXd weighted_gradient(const MatrixXd& W, const ActivationSpec& act, const MatrixXd& X,
                           const MatrixXd& Y, std::span<const std::size_t> idx, double scale) {
    MatrixXd g = MatrixXd::Zero(W.rows(), W.cols());
    for (std::size_t j : idx) {
        const auto i = static_cast<Eigen::Index>(j);
        for (Eigen::Index k = 0; k < W.rows(); ++k) {
            const double z = W.row(k).dot(X.col(i));
            const double c = (act_value(act, z) - Y(k, i)) * act_deriv(act, z);
            g.row(k) += c * X.col(i).transpose();
        }
    }
    return scale * g;
}

MatrixXd second_moment(const MatrixXd& X, std::span<const std::size_t> idx) {
    MatrixXd m = MatrixXd::Zero(X.rows(), X.rows());
    for (std::size_t j : idx) {
        const auto x = X.col(static_cast<Eigen::Index>(j));
        m.noalias() += x * x.transpose();
    }
    return idx.empty() ? m : MatrixXd(m / static_cast<double>(idx.size()));
}

std::vector<std::size_t> smallest_k(std::span<const double> zeta, std::size_t k) {
    std::vector<std::size_t> order(zeta.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return zeta[a] < zeta[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace rthresh::kernels::serial
