#pragma once

#include <cstddef>
#include <variant>

#include "robust_thresh/thresholding.hpp"
#include "robust_thresh/types.hpp"

namespace rthresh {

struct StepPlan {
    double eta = 0.1;
    std::size_t t_max = 1;
    double stop_param_change = 1e-10;
    // Inputs the plan was derived from, echoed into reports.
    SpectrumInfo spectrum;
    double radius_ref = 1.0;
    double gamma = 1.0;
};

// Iteration-count constant in T = ceil(c_T kappa^2 rho log(radius_ref / tol)).
inline constexpr double kIterConstant = 10.0;
// Upper clamp on the automatic iteration budget.
inline constexpr std::size_t kMaxAutoIters = 200000;

// grad R(W; S) = 2 / ((1 - eps_alg) N) * sum_{i in S} (sigma(W x_i) - y_i) o sigma'(W x_i) x_i^T
MatrixXd gradient_on_subset(const ModelParams& params, const ActivationSpec& act, const Dataset& ds,
                            const RetainedSet& s, double eps_alg, bool parallel = true);

// Risk on a subset: (1 / ((1 - eps_alg) N)) * sum_{i in S} zeta_i.
double subset_risk(const ModelParams& params, const ActivationSpec& act, const Dataset& ds,
                   const RetainedSet& s, double eps_alg);

StepPlan plan_steps(const Dataset& ds, const FitConfig& cfg, const ActivationSpec& act);

// Iterative thresholding with gradient steps for a K x d linear map from W = 0.
FitReport fit_linear_it(const Dataset& ds, const FitConfig& cfg);

// Iterative thresholding with gradient steps for a single neuron (K = 1),
// with optional random-ball restarts; the restart with the smallest final
// retained-set loss wins.
FitReport fit_neuron_it(const Dataset& ds, const ActivationSpec& act, const FitConfig& cfg);

struct AllSamples {};
struct TrueInliers {};
using OlsSubset = std::variant<AllSamples, TrueInliers, RetainedSet>;

// Exact least squares on a subset via the normal equations.
ModelParams ols_full_solve(const Dataset& ds, const OlsSubset& subset);

// Alternates hard thresholding with a full least-squares solve until the
// retained set repeats.
FitReport fit_torrent_fc(const Dataset& ds, const FitConfig& cfg);

// Wraps ols_full_solve(ds, AllSamples{}) as a report.
FitReport fit_ols(const Dataset& ds, const FitConfig& cfg);

// Columns `indices` of ds (mask and meta carried along).
Dataset subset_of(const Dataset& ds, const std::vector<std::size_t>& indices);

// ||estimate - W*||_F, or nullopt without ground truth.
std::optional<double> parameter_error(const Dataset& ds, const ModelParams& estimate);

}  // namespace rthresh
