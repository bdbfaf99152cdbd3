#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "robust_thresh/types.hpp"

namespace rthresh::lab {

struct LabReport {
    std::string lemma_id;
    std::size_t trials = 0;
    double empirical_stat = 0.0;
    double paper_bound = 0.0;
    std::optional<double> oracle_stat;
    // Upper-bound lemmas pass when empirical <= bound, lower-bound ones when >=.
    bool upper_bound = true;
    bool pass = false;
    nlohmann::json params_echo = nlohmann::json::object();
};

nlohmann::json to_json(const LabReport& r);

// --- chi-squared subset sums ------------------------------------------------

// max over |S| = k of sum_{i in S} xi_i^2, i.e. the k largest squares.
double worst_subset_energy(std::span<const double> xi, std::size_t k);

// Two readings of the bound: nu^2 * 30 n eps log(1/eps) and nu * 30 n eps log(1/eps).
std::vector<LabReport> worst_subset_noise_energy(std::size_t n, double eps, double nu, std::size_t trials,
                                                 std::uint64_t seed, double delta = 0.05);

// --- subset eigenvalues -----------------------------------------------------

struct SubsetExtremes {
    // Largest lambda_max(X_S X_S^T) over |S| = k.
    std::optional<double> max_top_exact;
    double max_top_norm = 0.0;         // S = k largest-norm columns
    double max_top_alternating = 0.0;  // local search from the top-norm start
    // Smallest lambda_min of the complement [n] \ S over |S| = k.
    std::optional<double> min_bottom_exact;
    double min_bottom_norm = 0.0;
    double min_bottom_alternating = 0.0;

    double max_top_heuristic() const { return std::max(max_top_norm, max_top_alternating); }
    double min_bottom_heuristic() const { return std::min(min_bottom_norm, min_bottom_alternating); }
};

// Brute force is attempted only when X has at most kBruteForceLimit columns.
inline constexpr std::size_t kBruteForceLimit = 14;
SubsetExtremes subset_extremes(const MatrixXd& X, std::size_t k);

// Reports for both the subset lambda_max upper bound and the complement
// lambda_min lower bound. Heuristic statistics (n > 14) are lower bounds on
// the true maximum and upper bounds on the true minimum.
std::vector<LabReport> subset_eigen_extremes(std::size_t n, std::size_t d, double eps, const MatrixXd& sigma,
                                             std::size_t trials, std::uint64_t seed);

// --- half-space second moment -----------------------------------------------

// (1 / (2 pi)) [[pi - t + sin t cos t, sin^2 t], [sin^2 t, pi - t - sin t cos t]]
Eigen::Matrix2d halfspace_closed_form(double theta);

// Monte Carlo E[x x^T 1{w1.x >= 0} 1{w2.x >= 0}] for x ~ N(0, I_d), w1 = e1,
// w2 = cos(theta) e1 + sin(theta) e2.
MatrixXd halfspace_moment_mc(double theta, std::size_t samples, std::uint64_t seed, std::size_t d = 3);

std::vector<LabReport> halfspace_second_moment(double theta, std::size_t mc_samples, std::uint64_t seed,
                                               double tolerance = 0.005);

// --- scaled Gaussian matrix -------------------------------------------------

double scaled_gaussian_bound(const MatrixXd& S, const MatrixXd& T, double nu, double delta);

// max over trials of ||S G T||_F with G ~ N(0, nu^2) resampled, against the
// bound at delta = 1 / trials.
LabReport scaled_gaussian_norm_check(const MatrixXd& S, const MatrixXd& T, double nu, std::size_t trials,
                                     std::uint64_t seed);
// S (k x n) and T (m x l) drawn once with standard normal entries.
LabReport scaled_gaussian_norm_check(std::size_t k, std::size_t n, std::size_t m, std::size_t l, double nu,
                                     std::size_t trials, std::uint64_t seed);

// --- sub-quantile optimality --------------------------------------------------

struct KeyStepSides {
    double lhs = 0.0;  // sum over S n Q of losses
    double rhs = 0.0;  // sum over P \ S of losses
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
};

// Evaluates both sides at `params` with S = HT(zeta, ceil((1 - eps_alg) N)).
// Throws ConfigError when |S n Q| != |P \ S| (eps_alg differs from the true rate).
KeyStepSides key_step_sides(const Dataset& ds, const ModelParams& params, const ActivationSpec& act, double eps_alg);
bool key_step_inequality_check(const Dataset& ds, const ModelParams& params, const ActivationSpec& act,
                               double eps_alg);

// Randomized instances cycling through adversaries and activations, each
// evaluated at a random perturbation of W*; stat is the number of violations.
LabReport key_step_trials(std::size_t n, std::size_t d, double eps, double nu, std::size_t trials,
                          std::uint64_t seed);

// --- helper inequalities -----------------------------------------------------

// sum_{i <= k} C(n, i) <= (e n / k)^k for every 1 <= k <= n <= n_max; stat is the worst ratio.
LabReport binomial_helper_check(std::size_t n_max = 30);

// ||sum a_i b_i x_i||^2 <= ||a||_inf^2 ||b||_2^2 ||X X^T||_2 on random instances; stat is the worst ratio.
LabReport hadamard_helper_check(std::size_t instances, std::uint64_t seed);

}  // namespace rthresh::lab
