#include "robust_thresh/thresholding.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "robust_thresh/errors.hpp"
#include "robust_thresh/kernels.hpp"

namespace rthresh {

double RetainedSet::loss_sum() const {
    return std::accumulate(losses_at_selection.begin(), losses_at_selection.end(), 0.0);
}

VectorXd per_sample_losses(const ModelParams& params, const ActivationSpec& act, const Dataset& ds,
                           bool parallel, std::size_t iteration) {
    const MatrixXd& W = params.weights;
    if (W.cols() != ds.covariates.rows() || W.rows() != ds.targets.rows() ||
        ds.covariates.cols() != ds.targets.cols())
        throw DimensionError("per_sample_losses: parameter / dataset shapes disagree");
    VectorXd zeta(ds.covariates.cols());
    std::span<double> out(zeta.data(), static_cast<std::size_t>(zeta.size()));
    if (parallel)
        kernels::parallel::per_sample_losses(W, act, ds.covariates, ds.targets, out);
    else
        kernels::serial::per_sample_losses(W, act, ds.covariates, ds.targets, out);
    if (!zeta.allFinite())
        throw DivergenceError("non-finite per-sample loss at iterate " + std::to_string(iteration) +
                                  " (model diverged; try a smaller step size)",
                              iteration);
    return zeta;
}

RetainedSet hard_threshold(std::span<const double> zeta, std::size_t k) {
    if (k < 1 || k > zeta.size())
        throw ConfigError("hard_threshold: k = " + std::to_string(k) + " outside [1, " +
                          std::to_string(zeta.size()) + "]");
    for (double z : zeta)
        if (!std::isfinite(z)) throw DivergenceError("hard_threshold: non-finite loss", 0);
    RetainedSet s;
    s.indices = kernels::parallel::smallest_k(zeta, k);
    s.losses_at_selection.reserve(k);
    for (std::size_t i : s.indices) s.losses_at_selection.push_back(zeta[i]);
    return s;
}

RetainedComposition composition(const RetainedSet& s, const std::vector<bool>& inlier_mask) {
    RetainedComposition c;
    for (std::size_t i : s.indices) {
        if (inlier_mask.at(i)) ++c.true_positives;
        else ++c.false_positives;
    }
    return c;
}

}  // namespace rthresh
