#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace rthresh {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Number of samples an adversary may touch: floor(eps * n). A small slack
// keeps products such as 0.29 * 100 from rounding down to 28.
std::size_t corruption_count(double eps, std::size_t n);

// Size of the retained set: ceil((1 - eps) * n), computed as n - floor(eps * n)
// so that both quantities always partition n.
std::size_t retained_count(double eps, std::size_t n);

struct DatasetMeta {
    std::uint64_t seed = 0;
    double eps = 0.0;
    double nu = 0.0;
    double B = 0.0;  // 0 means unbounded / not applicable
    std::string adversary = "none";
    std::string sigma_desc = "identity";
    std::string activation = "linear";
    // Ground-truth parameters when the data is synthetic (K x d).
    std::optional<MatrixXd> w_true;
};

// Samples are columns: covariates is d x N, targets is K x N.
struct Dataset {
    MatrixXd covariates;
    MatrixXd targets;
    // true = index in P (untouched), false = index in Q (adversary-modified).
    std::optional<std::vector<bool>> inlier_mask;
    DatasetMeta meta;

    std::size_t dim() const { return static_cast<std::size_t>(covariates.rows()); }
    std::size_t size() const { return static_cast<std::size_t>(covariates.cols()); }
    std::size_t outputs() const { return static_cast<std::size_t>(targets.rows()); }
};

// Empty result means every Dataset invariant holds.
std::vector<std::string> validate_dataset(const Dataset& ds);

// Weight matrix K x d; K = 1 for scalar-target problems.
struct ModelParams {
    MatrixXd weights;

    ModelParams() = default;
    explicit ModelParams(MatrixXd w) : weights(std::move(w)) {}
    static ModelParams zeros(std::size_t k, std::size_t d) {
        return ModelParams(MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)));
    }

    bool all_finite() const { return weights.allFinite(); }
};

enum class ActivationKind { Linear, Sigmoid, Tanh, LeakyRelu, SmoothLeakyRelu, Relu };

struct ActivationSpec {
    ActivationKind kind = ActivationKind::Linear;
    double gamma = 0.0;  // leaky slope
    double alpha = 0.0;  // smooth-leaky mixing weight
    double lip = 1.0;    // Lipschitz constant

    static ActivationSpec linear();
    static ActivationSpec sigmoid();
    static ActivationSpec tanh();
    static ActivationSpec leaky_relu(double gamma);
    static ActivationSpec smooth_leaky_relu(double alpha);
    static ActivationSpec relu();
};

struct SpectrumInfo {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    double kappa = 1.0;

    static SpectrumInfo from_bounds(double lambda_min, double lambda_max);
};

// Eigen-extremes of a symmetric positive-definite matrix.
SpectrumInfo spectrum_of(const MatrixXd& spd);

struct NoiseParams {
    double nu = 0.0;
    double B = 0.0;
    double delta = 0.05;
    double L = 3.0;
};

struct ZeroInit {};
struct RandomBallInit {
    // Fraction of radius_ref; nullopt picks the largest admissible value sqrt(1/(2 pi d)).
    std::optional<double> radius_scale;
};
using InitSpec = std::variant<ZeroInit, RandomBallInit>;

enum class RadiusRef {
    OlsPlugIn,  // ||w_ols|| over all samples
    TrueNorm,   // ||w*|| from the dataset meta (oracle knowledge)
};

struct FitConfig {
    double eps_alg = 0.0;
    std::optional<double> eta;                // nullopt = auto
    std::optional<std::size_t> max_iters;     // nullopt = auto
    double target_tol = 1e-8;
    double stop_param_change = 1e-10;
    InitSpec init = ZeroInit{};
    std::uint64_t seed = 0;
    std::optional<SpectrumInfo> spectrum;     // nullopt = estimate from data
    RadiusRef radius_ref = RadiusRef::OlsPlugIn;
    std::size_t restarts = 0;                 // 0 = auto (5 for ReLU, else 1)
    bool parallel_kernels = true;
};

// Throws ConfigError on an invalid configuration.
void validate_fit_config(const FitConfig& cfg);

struct TraceRecord {
    std::size_t iter = 0;
    double loss_on_retained = 0.0;
    double param_change = 0.0;
    std::size_t retained = 0;
    // Present only when the dataset carries an inlier mask.
    std::optional<std::size_t> retained_true_positives;
    std::optional<std::size_t> retained_false_positives;
    std::optional<double> param_error;
};

struct FitReport {
    ModelParams estimate;
    std::vector<TraceRecord> trace;
    FitConfig config_echo;
    bool converged = false;
    double eta_used = 0.0;
    std::size_t t_max_used = 0;
    std::size_t iterations = 0;
    std::size_t restart_chosen = 0;
    // Final retained set (sorted indices) and its loss.
    std::vector<std::size_t> final_retained;
    double final_retained_loss = 0.0;
    std::string algorithm;
};

}  // namespace rthresh
