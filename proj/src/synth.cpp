#include "robust_thresh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/errors.hpp"
#include "robust_thresh/rng.hpp"
#include "robust_thresh/text.hpp"

namespace rthresh {

MatrixXd sigma_matrix(const SigmaSpec& sigma, std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    if (std::holds_alternative<SigmaIdentity>(sigma)) return MatrixXd::Identity(n, n);
    if (const auto* geo = std::get_if<SigmaDiagGeometric>(&sigma)) {
        if (!(geo->kappa >= 1.0)) throw ConfigError("diag_geo kappa must be >= 1");
        VectorXd diag(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            diag(i) = std::pow(geo->kappa, -t);
        }
        return diag.asDiagonal();
    }
    const auto& m = std::get<MatrixXd>(sigma);
    if (m.rows() != n || m.cols() != n) throw DimensionError("sigma matrix must be d x d");
    return m;
}

std::string describe_sigma(const SigmaSpec& sigma) {
    if (std::holds_alternative<SigmaIdentity>(sigma)) return "identity";
    if (const auto* geo = std::get_if<SigmaDiagGeometric>(&sigma)) return "diag_geo:" + shortest(geo->kappa);
    return "custom";
}

SigmaSpec parse_sigma(std::string_view text) {
    if (text == "identity") return SigmaIdentity{};
    if (text.starts_with("diag_geo:")) return SigmaDiagGeometric{parse_double(text.substr(9), "kappa")};
    throw ConfigError("unknown sigma: " + std::string(text));
}

CovariateLaw parse_law(std::string_view text) {
    if (text == "gaussian") return CovariateLaw::Gaussian;
    if (text == "rademacher") return CovariateLaw::Rademacher;
    if (text == "uniform_ball") return CovariateLaw::UniformBall;
    throw ConfigError("unknown covariate law: " + std::string(text));
}

std::string format_law(CovariateLaw law) {
    switch (law) {
        case CovariateLaw::Gaussian: return "gaussian";
        case CovariateLaw::Rademacher: return "rademacher";
        case CovariateLaw::UniformBall: return "uniform_ball";
    }
    return "gaussian";
}

namespace {

// Symmetric square root of a PSD matrix; rejects negative eigenvalues.
MatrixXd psd_sqrt(const MatrixXd& sigma) {
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw ConfigError("sigma matrix is not symmetric");
    if (sigma.isDiagonal(0.0)) {
        const VectorXd diag = sigma.diagonal();
        for (Eigen::Index i = 0; i < diag.size(); ++i)
            if (diag(i) < 0.0)
                throw ConfigError("sigma matrix is not PSD: eigenvalue " + shortest(diag(i)));
        return diag.cwiseSqrt().asDiagonal();
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
    const VectorXd ev = es.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) < -tol) throw ConfigError("sigma matrix is not PSD: eigenvalue " + shortest(ev(i)));
    return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// Isotropic draw (E[z z^T] = I) under the chosen law.
void draw_isotropic(CounterStream& rng, CovariateLaw law, Eigen::Ref<VectorXd> z) {
    const auto d = z.size();
    switch (law) {
        case CovariateLaw::Gaussian:
            for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.next_normal();
            break;
        case CovariateLaw::Rademacher:
            for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.next_sign();
            break;
        case CovariateLaw::UniformBall: {
            // Uniform in the ball of radius sqrt(d + 2) has identity second moment.
            for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.next_normal();
            const double radius = std::sqrt(static_cast<double>(d) + 2.0) *
                                  std::pow(rng.next_unit(), 1.0 / static_cast<double>(d));
            const double norm = z.norm();
            z *= norm > 0.0 ? radius / norm : 0.0;
            break;
        }
    }
}

MatrixXd random_truth(const GeneratorSpec& g) {
    if (const auto* given = std::get_if<ModelParams>(&g.w_true)) {
        if (static_cast<std::size_t>(given->weights.rows()) != g.k ||
            static_cast<std::size_t>(given->weights.cols()) != g.d)
            throw DimensionError("w_true must be k x d");
        return given->weights;
    }
    const double R = std::get<RandomUnitScaled>(g.w_true).R;
    if (!(R > 0.0)) throw ConfigError("random_unit_scaled needs R > 0");
    CounterStream rng(g.seed, StreamTag::Truth, 0);
    MatrixXd w(static_cast<Eigen::Index>(g.k), static_cast<Eigen::Index>(g.d));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.next_normal();
    return w * (R / w.norm());
}

// Rescales x to norm <= bound, guaranteeing the bound in floating point.
void clamp_norm(Eigen::Ref<VectorXd> x, double bound) {
    double norm = x.norm();
    if (norm <= bound) return;
    x *= bound / norm;
    while ((norm = x.norm()) > bound) x *= std::nextafter(1.0, 0.0);
}

// A unit vector orthogonal to the rows of W (random when W has full column rank d).
VectorXd orthogonal_direction(const MatrixXd& W, CounterStream& rng) {
    const auto d = W.cols();
    VectorXd u(d);
    for (Eigen::Index j = 0; j < d; ++j) u(j) = rng.next_normal();
    if (W.rows() < d && W.norm() > 0.0) {
        Eigen::HouseholderQR<MatrixXd> qr(W.transpose());
        const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(d, W.rows());
        u -= Q * (Q.transpose() * u);
    }
    return u / u.norm();
}

std::vector<std::size_t> choose_random(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    CounterStream rng(seed, StreamTag::AdversaryChoice, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(m);
    std::sort(perm.begin(), perm.end());
    return perm;
}

std::vector<std::size_t> choose_largest_norm(const MatrixXd& X, std::size_t m) {
    std::vector<std::size_t> order(static_cast<std::size_t>(X.cols()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    const VectorXd norms = X.colwise().squaredNorm().transpose();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return norms(static_cast<Eigen::Index>(a)) > norms(static_cast<Eigen::Index>(b));
    });
    order.resize(m);
    std::sort(order.begin(), order.end());
    return order;
}

const MatrixXd& require_truth(const Dataset& ds, const char* who) {
    if (!ds.meta.w_true) throw ConfigError(std::string(who) + " adversary needs ground-truth w_true in the dataset");
    return *ds.meta.w_true;
}

}  // namespace

Dataset generate_clean(const GeneratorSpec& g, const ActivationSpec& act) {
    if (g.d == 0 || g.n == 0 || g.k == 0) throw ConfigError("d, n and k must be positive");
    if (!(g.nu >= 0.0) || !std::isfinite(g.nu)) throw ConfigError("nu must be finite and nonnegative");
    if (g.clip && !(*g.clip > 0.0)) throw ConfigError("covariate clip must be positive");
    validate_activation(act);
    const MatrixXd root = psd_sqrt(sigma_matrix(g.sigma, g.d));
    const bool isotropic = std::holds_alternative<SigmaIdentity>(g.sigma);
    const MatrixXd W = random_truth(g);

    const auto d = static_cast<Eigen::Index>(g.d);
    const auto K = static_cast<Eigen::Index>(g.k);
    const auto n = static_cast<std::ptrdiff_t>(g.n);
    Dataset ds;
    ds.covariates.resize(d, n);
    ds.targets.resize(K, n);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto ui = static_cast<std::uint64_t>(i);
        CounterStream cov(g.seed, StreamTag::Covariates, ui);
        VectorXd z(d);
        draw_isotropic(cov, g.law, z);
        if (!isotropic) z = root * z;
        if (g.clip) clamp_norm(z, *g.clip);
        ds.covariates.col(i) = z;
        CounterStream noise(g.seed, StreamTag::Noise, ui);
        for (Eigen::Index k = 0; k < K; ++k)
            ds.targets(k, i) = act_value(act, W.row(k).dot(z)) + g.nu * noise.next_normal();
    }

    ds.inlier_mask = std::vector<bool>(g.n, true);
    ds.meta.seed = g.seed;
    ds.meta.eps = 0.0;
    ds.meta.nu = g.nu;
    ds.meta.B = g.clip.value_or(0.0);
    ds.meta.adversary = "none";
    ds.meta.sigma_desc = describe_sigma(g.sigma);
    ds.meta.activation = format_activation(act);
    ds.meta.w_true = W;
    return ds;
}

AdversaryKind parse_adversary(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (name == "none") return NoAdversary{};
    if (name == "label_flip") return LabelSignFlipScale{arg.empty() ? 1.0 : parse_double(arg, "flip factor")};
    if (name == "additive") return AdditiveLabelOutlier{arg.empty() ? 1000.0 : parse_double(arg, "magnitude")};
    if (name == "oracle_model") {
        if (arg.empty() || arg == "neg") return OracleModel{std::nullopt, -1.0, 0.0};
        if (arg.starts_with("scale:")) return OracleModel{std::nullopt, parse_double(arg.substr(6), "scale"), 0.0};
        if (arg.starts_with("shift:")) return OracleModel{std::nullopt, 1.0, parse_double(arg.substr(6), "shift")};
        throw ConfigError("unknown oracle_model mode: " + std::string(arg));
    }
    if (name == "leverage") {
        if (arg.empty() || arg == "flip") return LeverageAttack{LeverageMode::Flip};
        if (arg == "orthogonal") return LeverageAttack{LeverageMode::Orthogonal};
        throw ConfigError("unknown leverage mode: " + std::string(arg));
    }
    if (name == "covariate_label") {
        const double B = arg.empty() ? 10.0 : parse_double(arg, "B");
        if (!(B > 0.0)) throw ConfigError("covariate_label needs B > 0");
        return CovariateAndLabel{B};
    }
    throw ConfigError("unknown adversary: " + std::string(text));
}

std::string format_adversary(const AdversaryKind& kind) {
    struct Visitor {
        std::string operator()(const NoAdversary&) const { return "none"; }
        std::string operator()(const LabelSignFlipScale& a) const { return "label_flip:" + shortest(a.factor); }
        std::string operator()(const AdditiveLabelOutlier& a) const { return "additive:" + shortest(a.magnitude); }
        std::string operator()(const OracleModel& a) const {
            if (a.w_adv) return "oracle_model:explicit";
            if (a.shift == 0.0 && a.scale == -1.0) return "oracle_model:neg";
            if (a.shift == 0.0) return "oracle_model:scale:" + shortest(a.scale);
            return "oracle_model:shift:" + shortest(a.shift);
        }
        std::string operator()(const LeverageAttack& a) const {
            return a.mode == LeverageMode::Flip ? "leverage:flip" : "leverage:orthogonal";
        }
        std::string operator()(const CovariateAndLabel& a) const { return "covariate_label:" + shortest(a.B); }
    };
    return std::visit(Visitor{}, kind);
}

Dataset corrupt(const Dataset& ds, const AdversarySpec& adv) {
    if (!(adv.eps_true >= 0.0 && adv.eps_true < 0.5)) throw ConfigError("eps_true must lie in [0, 0.5)");
    if (ds.inlier_mask && std::find(ds.inlier_mask->begin(), ds.inlier_mask->end(), false) != ds.inlier_mask->end())
        throw ConfigError("corrupt expects a clean dataset (all-true inlier mask)");
    const std::size_t n = ds.size();
    const std::size_t m = corruption_count(adv.eps_true, n);

    Dataset out = ds;
    out.inlier_mask = std::vector<bool>(n, true);
    out.meta.eps = adv.eps_true;
    out.meta.adversary = format_adversary(adv.kind);
    if (m == 0 || std::holds_alternative<NoAdversary>(adv.kind)) return out;

    const ActivationSpec act = parse_activation(ds.meta.activation);
    const double nu = ds.meta.nu;
    const auto K = ds.targets.rows();

    const std::vector<std::size_t> chosen = std::holds_alternative<LeverageAttack>(adv.kind)
                                                ? choose_largest_norm(ds.covariates, m)
                                                : choose_random(n, m, adv.seed);

    // Alternative model used by the relabelling adversaries.
    MatrixXd w_alt;
    VectorXd direction;
    if (const auto* om = std::get_if<OracleModel>(&adv.kind)) {
        if (om->w_adv) {
            w_alt = om->w_adv->weights;
            if (w_alt.rows() != K || w_alt.cols() != ds.covariates.rows())
                throw DimensionError("oracle model w_adv must be K x d");
        } else {
            const MatrixXd& W = require_truth(ds, "oracle_model");
            w_alt = om->scale * W;
            if (om->shift != 0.0) {
                CounterStream rng(adv.seed, StreamTag::AdversaryDirection, 0);
                MatrixXd u(W.rows(), W.cols());
                for (Eigen::Index c = 0; c < u.cols(); ++c)
                    for (Eigen::Index r = 0; r < u.rows(); ++r) u(r, c) = rng.next_normal();
                w_alt += om->shift * W.norm() * u / u.norm();
            }
        }
    } else if (const auto* lev = std::get_if<LeverageAttack>(&adv.kind)) {
        const MatrixXd& W = require_truth(ds, "leverage");
        if (lev->mode == LeverageMode::Flip) {
            w_alt = -W;
        } else {
            CounterStream rng(adv.seed, StreamTag::AdversaryDirection, 0);
            direction = orthogonal_direction(W, rng);
            w_alt = W + W.norm() * VectorXd::Ones(K) * direction.transpose();
        }
    } else if (const auto* cl = std::get_if<CovariateAndLabel>(&adv.kind)) {
        const MatrixXd& W = require_truth(ds, "covariate_label");
        CounterStream rng(adv.seed, StreamTag::AdversaryDirection, 0);
        direction = orthogonal_direction(W, rng);
        w_alt = W + (W.norm() + 1.0) * VectorXd::Ones(K) * direction.transpose();
        out.meta.B = cl->B;
    }

    const auto d = ds.covariates.rows();
    for (std::size_t j : chosen) {
        const auto i = static_cast<Eigen::Index>(j);
        (*out.inlier_mask)[j] = false;
        CounterStream noise(adv.seed, StreamTag::AdversaryNoise, j);
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, LabelSignFlipScale>) {
                    out.targets.col(i) = -a.factor * ds.targets.col(i);
                } else if constexpr (std::is_same_v<T, AdditiveLabelOutlier>) {
                    out.targets.col(i).array() += a.magnitude;
                } else if constexpr (std::is_same_v<T, OracleModel> || std::is_same_v<T, LeverageAttack>) {
                    for (Eigen::Index k = 0; k < K; ++k)
                        out.targets(k, i) = act_value(act, w_alt.row(k).dot(ds.covariates.col(i))) +
                                            nu * noise.next_normal();
                } else if constexpr (std::is_same_v<T, CovariateAndLabel>) {
                    VectorXd x = direction;
                    for (Eigen::Index c = 0; c < d; ++c)
                        x(c) += 0.25 * noise.next_normal() / std::sqrt(static_cast<double>(d));
                    x *= a.B / x.norm();
                    clamp_norm(x, a.B);
                    out.covariates.col(i) = x;
                    for (Eigen::Index k = 0; k < K; ++k)
                        out.targets(k, i) = act_value(act, w_alt.row(k).dot(x)) + nu * noise.next_normal();
                }
            },
            adv.kind);
    }
    return out;
}

}  // namespace rthresh
