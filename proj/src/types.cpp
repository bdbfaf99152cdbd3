#include "robust_thresh/types.hpp"

#include <cmath>

#include "robust_thresh/errors.hpp"

namespace rthresh {

std::size_t corruption_count(double eps, std::size_t n) {
    if (!(eps > 0.0)) return 0;
    const double raw = eps * static_cast<double>(n);
    return static_cast<std::size_t>(std::floor(raw + 1e-9 * std::max(1.0, raw)));
}

std::size_t retained_count(double eps, std::size_t n) { return n - corruption_count(eps, n); }

std::vector<std::string> validate_dataset(const Dataset& ds) {
    std::vector<std::string> out;
    if (ds.covariates.cols() != ds.targets.cols()) out.emplace_back("dimension mismatch");
    if (ds.inlier_mask) {
        const auto& mask = *ds.inlier_mask;
        if (mask.size() != ds.size()) {
            out.emplace_back("mask length mismatch");
        } else {
            std::size_t corrupted = 0;
            for (bool in : mask) corrupted += in ? 0 : 1;
            if (corrupted > corruption_count(ds.meta.eps, ds.size()))
                out.emplace_back("corruption budget exceeded");
        }
    }
    if (!ds.covariates.allFinite() || !ds.targets.allFinite()) out.emplace_back("non-finite entries");
    if (ds.meta.w_true) {
        const auto& w = *ds.meta.w_true;
        if (w.rows() != ds.targets.rows() || w.cols() != ds.covariates.rows())
            out.emplace_back("w_true shape mismatch");
    }
    return out;
}

SpectrumInfo SpectrumInfo::from_bounds(double lambda_min, double lambda_max) {
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min))
        throw ConfigError("spectrum bounds must satisfy 0 < lambda_min <= lambda_max");
    return {lambda_min, lambda_max, lambda_max / lambda_min};
}

SpectrumInfo spectrum_of(const MatrixXd& spd) {
    if (spd.rows() != spd.cols() || spd.rows() == 0) throw DimensionError("spectrum_of needs a square matrix");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(spd, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw SingularSystemError("matrix is not positive definite (lambda_min = " + std::to_string(lo) + ")");
    // Scalar multiples of the identity get kappa exactly 1.
    const double spread = (spd - spd.diagonal().mean() * MatrixXd::Identity(spd.rows(), spd.cols())).norm();
    if (spread == 0.0) return {hi, hi, 1.0};
    return {lo, hi, hi / lo};
}

void validate_fit_config(const FitConfig& cfg) {
    if (!(cfg.eps_alg >= 0.0 && cfg.eps_alg < 0.5)) throw ConfigError("eps_alg must lie in [0, 0.5)");
    if (cfg.eta && !(*cfg.eta > 0.0 && std::isfinite(*cfg.eta))) throw ConfigError("eta must be positive");
    if (cfg.max_iters && *cfg.max_iters == 0) throw ConfigError("max_iters must be positive");
    if (!(cfg.target_tol > 0.0)) throw ConfigError("target_tol must be positive");
    if (!(cfg.stop_param_change > 0.0)) throw ConfigError("stop_param_change must be positive");
    if (const auto* ball = std::get_if<RandomBallInit>(&cfg.init)) {
        if (ball->radius_scale && !(*ball->radius_scale > 0.0))
            throw ConfigError("random-ball radius scale must be positive");
    }
    if (cfg.spectrum) (void)SpectrumInfo::from_bounds(cfg.spectrum->lambda_min, cfg.spectrum->lambda_max);
}

}  // namespace rthresh
