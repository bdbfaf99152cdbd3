#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "robust_thresh/types.hpp"

namespace rthresh {

// Indices of the retained ("sub-quantile") samples, strictly increasing,
// together with their losses at selection time.
struct RetainedSet {
    std::vector<std::size_t> indices;
    std::vector<double> losses_at_selection;

    std::size_t size() const { return indices.size(); }
    double loss_sum() const;
};

// Squared residual norm of every sample under `params`. Throws DivergenceError
// (tagged with `iteration`) when a loss is not finite.
VectorXd per_sample_losses(const ModelParams& params, const ActivationSpec& act, const Dataset& ds,
                           bool parallel = true, std::size_t iteration = 0);

// HT(zeta; k): the k smallest losses, ties broken by lower index.
RetainedSet hard_threshold(std::span<const double> zeta, std::size_t k);
inline RetainedSet hard_threshold(const VectorXd& zeta, std::size_t k) {
    return hard_threshold(std::span<const double>(zeta.data(), static_cast<std::size_t>(zeta.size())), k);
}

// Retained-set counts against a ground-truth mask.
struct RetainedComposition {
    std::size_t true_positives = 0;   // |S n P|
    std::size_t false_positives = 0;  // |S n Q|
};
RetainedComposition composition(const RetainedSet& s, const std::vector<bool>& inlier_mask);

}  // namespace rthresh
