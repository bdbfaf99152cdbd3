#include "robust_thresh/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <string>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/errors.hpp"
#include "robust_thresh/kernels.hpp"
#include "robust_thresh/rng.hpp"

namespace rthresh {

namespace {

constexpr double kSingularRatio = 1e-12;
constexpr std::size_t kTorrentDefaultIters = 100;

std::span<const std::size_t> span_of(const std::vector<std::size_t>& v) { return {v.data(), v.size()}; }

void check_shapes(const ModelParams& params, const Dataset& ds) {
    if (params.weights.cols() != ds.covariates.rows() || params.weights.rows() != ds.targets.rows())
        throw DimensionError("parameter shape does not match the dataset");
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

void fill_composition(TraceRecord& rec, const Dataset& ds, const RetainedSet& s) {
    if (!ds.inlier_mask) return;
    const auto c = composition(s, *ds.inlier_mask);
    rec.retained_true_positives = c.true_positives;
    rec.retained_false_positives = c.false_positives;
}

// The shared thresholding / gradient loop.
FitReport run_iterative(const Dataset& ds, const ActivationSpec& act, const FitConfig& cfg,
                        const StepPlan& plan, MatrixXd W) {
    const std::size_t n = ds.size();
    const std::size_t k = retained_count(cfg.eps_alg, n);
    const bool par = cfg.parallel_kernels;
    const double norm = (1.0 - cfg.eps_alg) * static_cast<double>(n);

    FitReport rep;
    rep.config_echo = cfg;
    rep.eta_used = plan.eta;
    rep.t_max_used = plan.t_max;
    rep.trace.reserve(std::min<std::size_t>(plan.t_max, 4096));

    for (std::size_t t = 0; t < plan.t_max; ++t) {
        ModelParams current(W);
        const VectorXd zeta = per_sample_losses(current, act, ds, par, t);
        const RetainedSet s = hard_threshold(zeta, k);
        const MatrixXd g = gradient_on_subset(current, act, ds, s, cfg.eps_alg, par);
        MatrixXd next = W - plan.eta * g;
        if (!next.allFinite())
            throw DivergenceError("non-finite iterate " + std::to_string(t + 1) + " (step size too large?)", t + 1);

        TraceRecord rec;
        rec.iter = t;
        rec.loss_on_retained = s.loss_sum() / norm;
        rec.param_change = (next - W).norm();
        rec.retained = s.size();
        fill_composition(rec, ds, s);
        W = std::move(next);
        rec.param_error = parameter_error(ds, ModelParams(W));
        rep.trace.push_back(rec);
        rep.iterations = t + 1;
        if (rec.param_change < plan.stop_param_change) {
            rep.converged = true;
            break;
        }
    }

    rep.estimate = ModelParams(W);
    const VectorXd zeta = per_sample_losses(rep.estimate, act, ds, par, rep.iterations);
    const RetainedSet final_set = hard_threshold(zeta, k);
    rep.final_retained = final_set.indices;
    rep.final_retained_loss = final_set.loss_sum() / norm;
    return rep;
}

MatrixXd random_ball_point(std::size_t d, double radius, std::uint64_t seed, std::uint64_t restart) {
    CounterStream rng(seed, StreamTag::Init, restart);
    VectorXd v(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.next_normal();
    const double r = radius * std::pow(rng.next_unit(), 1.0 / static_cast<double>(d));
    const double nv = v.norm();
    return (nv > 0.0 ? VectorXd(v * (r / nv)) : VectorXd::Zero(v.size())).transpose();
}

}  // namespace

std::optional<double> parameter_error(const Dataset& ds, const ModelParams& estimate) {
    if (!ds.meta.w_true) return std::nullopt;
    const MatrixXd& W = *ds.meta.w_true;
    if (W.rows() != estimate.weights.rows() || W.cols() != estimate.weights.cols()) return std::nullopt;
    return (estimate.weights - W).norm();
}

Dataset subset_of(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.meta = ds.meta;
    out.covariates.resize(ds.covariates.rows(), static_cast<Eigen::Index>(indices.size()));
    out.targets.resize(ds.targets.rows(), static_cast<Eigen::Index>(indices.size()));
    std::vector<bool> mask;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        const auto i = static_cast<Eigen::Index>(indices[j]);
        out.covariates.col(c) = ds.covariates.col(i);
        out.targets.col(c) = ds.targets.col(i);
        if (ds.inlier_mask) mask.push_back((*ds.inlier_mask)[indices[j]]);
    }
    if (ds.inlier_mask) {
        out.inlier_mask = std::move(mask);
        const auto bad = static_cast<std::size_t>(std::count(out.inlier_mask->begin(), out.inlier_mask->end(), false));
        out.meta.eps = indices.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(indices.size());
    }
    return out;
}

MatrixXd gradient_on_subset(const ModelParams& params, const ActivationSpec& act, const Dataset& ds,
                            const RetainedSet& s, double eps_alg, bool parallel) {
    check_shapes(params, ds);
    if (s.indices.empty()) throw ConfigError("gradient_on_subset: empty retained set");
    const double scale = 2.0 / ((1.0 - eps_alg) * static_cast<double>(ds.size()));
    MatrixXd g = parallel ? kernels::parallel::weighted_gradient(params.weights, act, ds.covariates, ds.targets,
                                                                 span_of(s.indices), scale)
                          : kernels::serial::weighted_gradient(params.weights, act, ds.covariates, ds.targets,
                                                               span_of(s.indices), scale);
    if (!g.allFinite()) throw DivergenceError("non-finite gradient", 0);
    return g;
}

double subset_risk(const ModelParams& params, const ActivationSpec& act, const Dataset& ds,
                   const RetainedSet& s, double eps_alg) {
    check_shapes(params, ds);
    double sum = 0.0;
    for (std::size_t j : s.indices) {
        const auto i = static_cast<Eigen::Index>(j);
        for (Eigen::Index k = 0; k < params.weights.rows(); ++k) {
            const double r = act_value(act, params.weights.row(k).dot(ds.covariates.col(i))) - ds.targets(k, i);
            sum += r * r;
        }
    }
    return sum / ((1.0 - eps_alg) * static_cast<double>(ds.size()));
}

StepPlan plan_steps(const Dataset& ds, const FitConfig& cfg, const ActivationSpec& act) {
    validate_fit_config(cfg);
    StepPlan plan;
    plan.stop_param_change = cfg.stop_param_change;

    if (cfg.spectrum) {
        plan.spectrum = *cfg.spectrum;
    } else {
        const auto idx = all_indices(ds.size());
        const MatrixXd m = cfg.parallel_kernels ? kernels::parallel::second_moment(ds.covariates, span_of(idx))
                                                : kernels::serial::second_moment(ds.covariates, span_of(idx));
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(lo > 1e-12))
            throw SingularSystemError("sample second-moment matrix is singular (lambda_min = " + std::to_string(lo) +
                                      "); use more samples than dimensions");
        plan.spectrum = {lo, hi, hi / lo};
    }
    const double lmax = plan.spectrum.lambda_max;
    const double kappa = plan.spectrum.kappa;

    if (cfg.radius_ref == RadiusRef::TrueNorm) {
        if (!ds.meta.w_true) throw ConfigError("radius_ref = true_norm needs ground truth in the dataset");
        plan.radius_ref = ds.meta.w_true->norm();
    } else {
        plan.radius_ref = ols_full_solve(ds, AllSamples{}).weights.norm();
    }
    plan.radius_ref = std::max(plan.radius_ref, cfg.target_tol);

    const double linear_eta = 0.1 / lmax;
    switch (act.kind) {
        case ActivationKind::Linear:
        case ActivationKind::Relu: plan.gamma = 1.0; break;
        case ActivationKind::Sigmoid:
        case ActivationKind::Tanh: plan.gamma = act_gamma_floor(act, 2.0 * plan.radius_ref * std::sqrt(lmax)); break;
        default: plan.gamma = act_gamma_floor(act, 0.0); break;
    }
    if (cfg.eta) {
        plan.eta = *cfg.eta;
    } else if (act.kind == ActivationKind::Linear) {
        plan.eta = linear_eta;
    } else {
        const double lip4 = std::pow(act.lip, 4);
        plan.eta = 0.1 * plan.gamma * plan.gamma / (lip4 * kappa * kappa * lmax);
    }

    if (cfg.max_iters) {
        plan.t_max = *cfg.max_iters;
    } else {
        // The guaranteed contraction per step scales with eta * gamma^2; relative
        // to the linear rate that costs proportionally more iterations.
        const double rho = std::max(1.0, linear_eta / (plan.eta * plan.gamma * plan.gamma));
        const double raw = kIterConstant * kappa * kappa * rho * std::log(plan.radius_ref / cfg.target_tol);
        plan.t_max = raw <= 1.0 ? 1 : static_cast<std::size_t>(std::min(std::ceil(raw), static_cast<double>(kMaxAutoIters)));
    }
    return plan;
}

FitReport fit_linear_it(const Dataset& ds, const FitConfig& cfg) {
    validate_fit_config(cfg);
    if (!std::holds_alternative<ZeroInit>(cfg.init)) throw ConfigError("linear_it starts from W = 0; use init = zero");
    const ActivationSpec act = ActivationSpec::linear();
    const StepPlan plan = plan_steps(ds, cfg, act);
    FitReport rep = run_iterative(ds, act, cfg, plan, MatrixXd::Zero(ds.targets.rows(), ds.covariates.rows()));
    rep.algorithm = "linear_it";
    return rep;
}

FitReport fit_neuron_it(const Dataset& ds, const ActivationSpec& act, const FitConfig& cfg) {
    validate_fit_config(cfg);
    validate_activation(act);
    if (ds.targets.rows() != 1) throw ConfigError("neuron_it needs scalar targets (K = 1)");
    const StepPlan plan = plan_steps(ds, cfg, act);
    const std::size_t d = ds.dim();

    const auto* ball = std::get_if<RandomBallInit>(&cfg.init);
    double radius = 0.0;
    if (ball) {
        const double limit = std::sqrt(1.0 / (2.0 * std::numbers::pi * static_cast<double>(d)));
        const double scale = ball->radius_scale.value_or(limit);
        if (scale > limit * (1.0 + 1e-12))
            throw ConfigError("random-ball radius scale exceeds sqrt(1/(2 pi d)) = " + std::to_string(limit));
        radius = scale * plan.radius_ref;
    }
    std::size_t restarts = cfg.restarts != 0 ? cfg.restarts : (act.kind == ActivationKind::Relu ? 5 : 1);
    if (!ball) restarts = 1;  // every restart from W = 0 is identical

    std::vector<FitReport> runs(restarts);
    std::vector<std::exception_ptr> errors(restarts);
#pragma omp parallel for schedule(dynamic) if (restarts > 1)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(restarts); ++r) {
        try {
            const auto ur = static_cast<std::size_t>(r);
            MatrixXd w0 = ball ? random_ball_point(d, radius, cfg.seed, ur) : MatrixXd::Zero(1, static_cast<Eigen::Index>(d));
            runs[ur] = run_iterative(ds, act, cfg, plan, std::move(w0));
            runs[ur].restart_chosen = ur;
        } catch (...) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (runs[r].final_retained_loss < runs[best].final_retained_loss) best = r;
    FitReport rep = std::move(runs[best]);
    rep.algorithm = "neuron_it";
    return rep;
}

ModelParams ols_full_solve(const Dataset& ds, const OlsSubset& subset) {
    std::vector<std::size_t> idx;
    if (std::holds_alternative<AllSamples>(subset)) {
        idx = all_indices(ds.size());
    } else if (std::holds_alternative<TrueInliers>(subset)) {
        if (!ds.inlier_mask) throw ConfigError("true_inliers subset needs an inlier mask");
        for (std::size_t i = 0; i < ds.size(); ++i)
            if ((*ds.inlier_mask)[i]) idx.push_back(i);
    } else {
        idx = std::get<RetainedSet>(subset).indices;
    }
    if (idx.empty()) throw ConfigError("ols_full_solve: empty subset");

    const Eigen::Index d = ds.covariates.rows();
    MatrixXd A = MatrixXd::Zero(d, d);
    MatrixXd B = MatrixXd::Zero(ds.targets.rows(), d);
    for (std::size_t j : idx) {
        const auto i = static_cast<Eigen::Index>(j);
        const auto x = ds.covariates.col(i);
        A.noalias() += x * x.transpose();
        B.noalias() += ds.targets.col(i) * x.transpose();
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
    const VectorXd ev = es.eigenvalues();
    const double hi = ev.maxCoeff();
    if (!(hi > 0.0) || !(ev.minCoeff() > kSingularRatio * hi))
        throw SingularSystemError("least-squares system is singular (rank deficient covariates)");
    const MatrixXd& V = es.eigenvectors();
    MatrixXd W = ((B * V) * ev.cwiseInverse().asDiagonal()) * V.transpose();
    return ModelParams(std::move(W));
}

FitReport fit_torrent_fc(const Dataset& ds, const FitConfig& cfg) {
    validate_fit_config(cfg);
    const ActivationSpec act = ActivationSpec::linear();
    const std::size_t n = ds.size();
    const std::size_t k = retained_count(cfg.eps_alg, n);
    const double norm = (1.0 - cfg.eps_alg) * static_cast<double>(n);
    const std::size_t t_max = cfg.max_iters.value_or(kTorrentDefaultIters);

    FitReport rep;
    rep.algorithm = "torrent_fc";
    rep.config_echo = cfg;
    rep.t_max_used = t_max;
    MatrixXd W = MatrixXd::Zero(ds.targets.rows(), ds.covariates.rows());
    std::vector<std::size_t> previous;
    RetainedSet s;
    for (std::size_t t = 0; t <= t_max; ++t) {
        const VectorXd zeta = per_sample_losses(ModelParams(W), act, ds, cfg.parallel_kernels, t);
        s = hard_threshold(zeta, k);
        if (s.indices == previous) {
            rep.converged = true;
            break;
        }
        if (t == t_max) break;
        MatrixXd next = ols_full_solve(ds, s).weights;
        TraceRecord rec;
        rec.iter = t;
        rec.loss_on_retained = s.loss_sum() / norm;
        rec.param_change = (next - W).norm();
        rec.retained = s.size();
        fill_composition(rec, ds, s);
        W = std::move(next);
        rec.param_error = parameter_error(ds, ModelParams(W));
        rep.trace.push_back(rec);
        rep.iterations = t + 1;
        previous = s.indices;
    }
    rep.estimate = ModelParams(W);
    rep.final_retained = s.indices;
    rep.final_retained_loss = s.loss_sum() / norm;
    return rep;
}

FitReport fit_ols(const Dataset& ds, const FitConfig& cfg) {
    FitReport rep;
    rep.algorithm = "ols";
    rep.config_echo = cfg;
    rep.estimate = ols_full_solve(ds, AllSamples{});
    rep.converged = true;
    rep.iterations = 1;
    const VectorXd zeta = per_sample_losses(rep.estimate, ActivationSpec::linear(), ds, cfg.parallel_kernels);
    const RetainedSet s = hard_threshold(zeta, ds.size());
    rep.final_retained = s.indices;
    rep.final_retained_loss = s.loss_sum() / static_cast<double>(ds.size());
    return rep;
}

}  // namespace rthresh
