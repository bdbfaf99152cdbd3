#include "robust_thresh/lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/errors.hpp"
#include "robust_thresh/rng.hpp"
#include "robust_thresh/synth.hpp"
#include "robust_thresh/thresholding.hpp"

namespace rthresh::lab {

using nlohmann::json;

namespace {

void finalize(LabReport& r) {
    r.pass = r.upper_bound ? r.empirical_stat <= r.paper_bound : r.empirical_stat >= r.paper_bound;
}

double lambda_max_of(const MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

MatrixXd gram_of(const MatrixXd& X, const std::vector<std::size_t>& idx) {
    MatrixXd m = MatrixXd::Zero(X.rows(), X.rows());
    for (std::size_t j : idx) {
        const auto x = X.col(static_cast<Eigen::Index>(j));
        m.noalias() += x * x.transpose();
    }
    return m;
}

std::vector<std::size_t> complement_of(const std::vector<std::size_t>& s, std::size_t n) {
    std::vector<bool> in(n, false);
    for (std::size_t i : s) in[i] = true;
    std::vector<std::size_t> out;
    out.reserve(n - s.size());
    for (std::size_t i = 0; i < n; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

// Indices of the k largest scores, ties to the lower index, sorted.
std::vector<std::size_t> top_k(const VectorXd& score, std::size_t k) {
    std::vector<std::size_t> order(static_cast<std::size_t>(score.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score(static_cast<Eigen::Index>(a)) > score(static_cast<Eigen::Index>(b));
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

// Calls fn on every k-subset of {0..n-1} in lexicographic order.
void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> c(k);
    std::iota(c.begin(), c.end(), std::size_t{0});
    for (;;) {
        fn(c);
        std::size_t i = k;
        while (i > 0 && c[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) return;
        ++c[i - 1];
        for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    }
}

constexpr int kAlternatingRounds = 100;

}  // namespace

json to_json(const LabReport& r) {
    return {{"lemma_id", r.lemma_id},
            {"trials", r.trials},
            {"empirical_stat", r.empirical_stat},
            {"paper_bound", r.paper_bound},
            {"oracle_stat", r.oracle_stat ? json(*r.oracle_stat) : json(nullptr)},
            {"bound_kind", r.upper_bound ? "upper" : "lower"},
            {"pass", r.pass},
            {"params_echo", r.params_echo}};
}

double worst_subset_energy(std::span<const double> xi, std::size_t k) {
    if (k > xi.size()) throw ConfigError("subset size exceeds sample count");
    std::vector<double> sq(xi.size());
    std::transform(xi.begin(), xi.end(), sq.begin(), [](double v) { return v * v; });
    std::partial_sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k), sq.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += sq[i];
    return sum;
}

std::vector<LabReport> worst_subset_noise_energy(std::size_t n, double eps, double nu, std::size_t trials,
                                                 std::uint64_t seed, double delta) {
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("eps must lie in (0, 0.5)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (static_cast<double>(n) < std::log(1.0 / delta)) throw ConfigError("need n >= log(1/delta)");
    if (trials == 0) throw ConfigError("trials must be positive");
    if (!(nu >= 0.0)) throw ConfigError("nu must be nonnegative");
    const std::size_t k = corruption_count(eps, n);

    std::vector<double> stats(trials);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(trials); ++t) {
        CounterStream rng(seed, StreamTag::Lab, static_cast<std::uint64_t>(t));
        std::vector<double> xi(n);
        for (double& v : xi) v = nu * rng.next_normal();
        stats[static_cast<std::size_t>(t)] = worst_subset_energy(xi, k);
    }
    const double worst = *std::max_element(stats.begin(), stats.end());
    const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / static_cast<double>(trials);
    const double base = 30.0 * static_cast<double>(n) * eps * std::log(1.0 / eps);
    const json echo = {{"n", n}, {"eps", eps}, {"nu", nu}, {"k", k}, {"delta", delta}, {"seed", seed},
                       {"mean_stat", mean}};

    LabReport squared{"chi2_subset.nu_squared", trials, worst, nu * nu * base, std::nullopt, true, false, echo};
    LabReport linear{"chi2_subset.nu_linear", trials, worst, nu * base, std::nullopt, true, false, echo};
    finalize(squared);
    finalize(linear);
    return {squared, linear};
}

SubsetExtremes subset_extremes(const MatrixXd& X, std::size_t k) {
    const auto n = static_cast<std::size_t>(X.cols());
    if (k == 0 || k >= n) throw ConfigError("subset_extremes needs 0 < k < n");
    SubsetExtremes out;

    if (n <= kBruteForceLimit) {
        double best_max = -std::numeric_limits<double>::infinity();
        double best_min = std::numeric_limits<double>::infinity();
        for_each_subset(n, k, [&](const std::vector<std::size_t>& s) {
            best_max = std::max(best_max, lambda_max_of(gram_of(X, s)));
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram_of(X, complement_of(s, n)), Eigen::EigenvaluesOnly);
            best_min = std::min(best_min, es.eigenvalues().minCoeff());
        });
        out.max_top_exact = best_max;
        out.min_bottom_exact = best_min;
    }

    const VectorXd norms = X.colwise().squaredNorm().transpose();
    const std::vector<std::size_t> by_norm = top_k(norms, k);
    out.max_top_norm = lambda_max_of(gram_of(X, by_norm));
    {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram_of(X, complement_of(by_norm, n)), Eigen::EigenvaluesOnly);
        out.min_bottom_norm = es.eigenvalues().minCoeff();
    }

    // Alternate between the extreme eigenvector of the current selection and
    // the k columns with the largest projection onto it.
    std::vector<std::size_t> s = by_norm;
    out.max_top_alternating = out.max_top_norm;
    for (int round = 0; round < kAlternatingRounds; ++round) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram_of(X, s));
        const VectorXd v = es.eigenvectors().col(es.eigenvalues().size() - 1);
        std::vector<std::size_t> next = top_k((v.transpose() * X).array().square().matrix().transpose(), k);
        if (next == s) break;
        s = std::move(next);
        out.max_top_alternating = std::max(out.max_top_alternating, lambda_max_of(gram_of(X, s)));
    }
    s = by_norm;
    out.min_bottom_alternating = out.min_bottom_norm;
    for (int round = 0; round < kAlternatingRounds; ++round) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram_of(X, complement_of(s, n)));
        const VectorXd v = es.eigenvectors().col(0);
        std::vector<std::size_t> next = top_k((v.transpose() * X).array().square().matrix().transpose(), k);
        if (next == s) break;
        s = std::move(next);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es2(gram_of(X, complement_of(s, n)), Eigen::EigenvaluesOnly);
        out.min_bottom_alternating = std::min(out.min_bottom_alternating, es2.eigenvalues().minCoeff());
    }
    return out;
}

std::vector<LabReport> subset_eigen_extremes(std::size_t n, std::size_t d, double eps, const MatrixXd& sigma,
                                             std::size_t trials, std::uint64_t seed) {
    if (n == 0 || d == 0 || trials == 0) throw ConfigError("n, d and trials must be positive");
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("eps must lie in (0, 0.5)");
    const std::size_t k = corruption_count(eps, n);
    if (k == 0) throw ConfigError("floor(eps n) must be at least 1");
    const SpectrumInfo spec = spectrum_of(sigma);
    const bool exact = n <= kBruteForceLimit;

    std::vector<SubsetExtremes> per_trial(trials);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(trials); ++t) {
        GeneratorSpec g;
        g.d = d;
        g.n = n;
        g.sigma = sigma;
        g.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        const Dataset ds = generate_clean(g, ActivationSpec::linear());
        per_trial[static_cast<std::size_t>(t)] = subset_extremes(ds.covariates, k);
    }

    double top_stat = 0.0, top_heur = 0.0;
    double bottom_stat = std::numeric_limits<double>::infinity(), bottom_heur = bottom_stat;
    std::size_t top_match = 0, bottom_match = 0;
    for (const auto& e : per_trial) {
        top_heur = std::max(top_heur, e.max_top_heuristic());
        bottom_heur = std::min(bottom_heur, e.min_bottom_heuristic());
        top_stat = std::max(top_stat, e.max_top_exact.value_or(e.max_top_heuristic()));
        bottom_stat = std::min(bottom_stat, e.min_bottom_exact.value_or(e.min_bottom_heuristic()));
        if (exact) {
            top_match += std::abs(e.max_top_heuristic() - *e.max_top_exact) <= 1e-9 * *e.max_top_exact ? 1 : 0;
            bottom_match +=
                std::abs(e.min_bottom_heuristic() - *e.min_bottom_exact) <= 1e-9 * std::max(1.0, *e.min_bottom_exact) ? 1 : 0;
        }
    }
    json echo = {{"n", n}, {"d", d}, {"eps", eps}, {"k", k}, {"seed", seed},
                 {"lambda_min_sigma", spec.lambda_min}, {"lambda_max_sigma", spec.lambda_max},
                 {"method", exact ? "exhaustive" : "heuristic_lower_bound"}};

    LabReport top{"subset_eigs.lambda_max", trials, top_stat,
                  spec.lambda_max * 10.0 * static_cast<double>(n) * eps * std::log(1.0 / eps), std::nullopt, true,
                  false, echo};
    top.params_echo["heuristic_stat"] = top_heur;
    LabReport bottom{"subset_eigs.lambda_min_complement", trials, bottom_stat,
                     static_cast<double>(n) * spec.lambda_min / 4.0, std::nullopt, false, false, echo};
    bottom.params_echo["heuristic_stat"] = bottom_heur;
    if (exact) {
        top.oracle_stat = top_stat;
        bottom.oracle_stat = bottom_stat;
        top.params_echo["heuristic_equality_rate"] = static_cast<double>(top_match) / static_cast<double>(trials);
        bottom.params_echo["heuristic_equality_rate"] = static_cast<double>(bottom_match) / static_cast<double>(trials);
    }
    finalize(top);
    finalize(bottom);
    return {top, bottom};
}

Eigen::Matrix2d halfspace_closed_form(double theta) {
    const double s = std::sin(theta), c = std::cos(theta);
    const double pi = std::numbers::pi;
    Eigen::Matrix2d m;
    m << pi - theta + s * c, s * s, s * s, pi - theta - s * c;
    return m / (2.0 * pi);
}

MatrixXd halfspace_moment_mc(double theta, std::size_t samples, std::uint64_t seed, std::size_t d) {
    if (d < 2) throw ConfigError("half-space moment needs d >= 2");
    if (samples == 0) throw ConfigError("mc_samples must be positive");
    constexpr std::size_t kChunk = 8192;
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    const auto dd = static_cast<Eigen::Index>(d);
    const double c = std::cos(theta), s = std::sin(theta);
    std::vector<MatrixXd> parts(chunks, MatrixXd::Zero(dd, dd));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(chunks); ++b) {
        CounterStream rng(seed, StreamTag::Lab, static_cast<std::uint64_t>(b));
        const std::size_t lo = static_cast<std::size_t>(b) * kChunk;
        const std::size_t hi = std::min(samples, lo + kChunk);
        VectorXd x(dd);
        MatrixXd& acc = parts[static_cast<std::size_t>(b)];
        for (std::size_t i = lo; i < hi; ++i) {
            for (Eigen::Index j = 0; j < dd; ++j) x(j) = rng.next_normal();
            if (x(0) >= 0.0 && c * x(0) + s * x(1) >= 0.0) acc.noalias() += x * x.transpose();
        }
    }
    MatrixXd total = MatrixXd::Zero(dd, dd);
    for (const auto& p : parts) total += p;
    return total / static_cast<double>(samples);
}

std::vector<LabReport> halfspace_second_moment(double theta, std::size_t mc_samples, std::uint64_t seed,
                                               double tolerance) {
    const double pi = std::numbers::pi;
    if (!(theta >= 0.0 && theta <= pi / 2.0 + 1e-15)) throw ConfigError("theta must lie in [0, pi/2]");
    const MatrixXd m = halfspace_moment_mc(theta, mc_samples, seed, 3);
    const Eigen::Matrix2d closed = halfspace_closed_form(theta);
    const double block_dev = (m.topLeftCorner(2, 2) - closed).cwiseAbs().maxCoeff();
    const double plane_mass = (pi - theta) / (2.0 * pi);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double lam_min = es.eigenvalues().minCoeff();
    const double printed = (pi - theta - std::sin(theta)) / 2.0;

    json echo = {{"theta", theta}, {"mc_samples", mc_samples}, {"seed", seed}, {"d", 3},
                 {"mc_block", {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}},
                 {"closed_form_block", {{closed(0, 0), closed(0, 1)}, {closed(1, 0), closed(1, 1)}}},
                 {"mc_out_of_plane", m(2, 2)}};

    LabReport block{"halfspace.block", 1, block_dev, tolerance, 0.0, true, false, echo};
    LabReport plane{"halfspace.out_of_plane", 1, std::abs(m(2, 2) - plane_mass), tolerance, 0.0, true, false, echo};
    plane.params_echo["closed_form"] = plane_mass;
    LabReport as_printed{"halfspace.bound_as_printed", 1, lam_min, printed, std::nullopt, false, false, echo};
    LabReport normalized{"halfspace.bound_normalized", 1, lam_min, printed / (2.0 * pi), std::nullopt, false, false, echo};
    const double exact_min = std::min((pi - theta - std::sin(theta)) / (2.0 * pi), plane_mass);
    as_printed.oracle_stat = exact_min;
    normalized.oracle_stat = exact_min;
    for (auto* r : {&block, &plane, &as_printed, &normalized}) finalize(*r);
    return {block, plane, as_printed, normalized};
}

double scaled_gaussian_bound(const MatrixXd& S, const MatrixXd& T, double nu, double delta) {
    const double nm = static_cast<double>(S.cols()) * static_cast<double>(T.rows());
    return S.norm() * T.norm() * nu * std::sqrt(2.0 * std::log(2.0 * nm / delta));
}

LabReport scaled_gaussian_norm_check(const MatrixXd& S, const MatrixXd& T, double nu, std::size_t trials,
                                     std::uint64_t seed) {
    if (trials == 0) throw ConfigError("trials must be positive");
    if (!(nu >= 0.0)) throw ConfigError("nu must be nonnegative");
    const Eigen::Index n = S.cols(), m = T.rows();
    std::vector<double> stats(trials);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(trials); ++t) {
        CounterStream rng(seed, StreamTag::Lab, static_cast<std::uint64_t>(t));
        MatrixXd G(n, m);
        for (Eigen::Index c = 0; c < m; ++c)
            for (Eigen::Index r = 0; r < n; ++r) G(r, c) = nu * rng.next_normal();
        stats[static_cast<std::size_t>(t)] = (S * G * T).norm();
    }
    const double delta = 1.0 / static_cast<double>(trials);
    LabReport r{"scaled_gauss", trials, *std::max_element(stats.begin(), stats.end()),
                scaled_gaussian_bound(S, T, nu, delta), std::nullopt, true, false,
                {{"k", S.rows()}, {"n", n}, {"m", m}, {"l", T.cols()}, {"nu", nu}, {"delta", delta}, {"seed", seed}}};
    finalize(r);
    return r;
}

LabReport scaled_gaussian_norm_check(std::size_t k, std::size_t n, std::size_t m, std::size_t l, double nu,
                                     std::size_t trials, std::uint64_t seed) {
    if (k == 0 || n == 0 || m == 0 || l == 0) throw ConfigError("matrix dimensions must be positive");
    CounterStream rng(derive_seed(seed, 0x5157), StreamTag::Lab, 0);
    MatrixXd S(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
    MatrixXd T(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l));
    for (Eigen::Index i = 0; i < S.size(); ++i) S.data()[i] = rng.next_normal();
    for (Eigen::Index i = 0; i < T.size(); ++i) T.data()[i] = rng.next_normal();
    return scaled_gaussian_norm_check(S, T, nu, trials, seed);
}

KeyStepSides key_step_sides(const Dataset& ds, const ModelParams& params, const ActivationSpec& act, double eps_alg) {
    if (!ds.inlier_mask) throw ConfigError("key-step check needs an inlier mask");
    if (!(eps_alg >= 0.0 && eps_alg < 0.5)) throw ConfigError("eps_alg must lie in [0, 0.5)");
    const std::size_t n = ds.size();
    const VectorXd zeta = per_sample_losses(params, act, ds);
    const RetainedSet s = hard_threshold(zeta, retained_count(eps_alg, n));
    std::vector<bool> retained(n, false);
    for (std::size_t i : s.indices) retained[i] = true;
    KeyStepSides out;
    for (std::size_t i = 0; i < n; ++i) {
        const bool inlier = (*ds.inlier_mask)[i];
        if (retained[i] && !inlier) {
            out.lhs += zeta(static_cast<Eigen::Index>(i));
            ++out.false_positives;
        } else if (!retained[i] && inlier) {
            out.rhs += zeta(static_cast<Eigen::Index>(i));
            ++out.false_negatives;
        }
    }
    if (out.false_positives != out.false_negatives)
        throw ConfigError("key-step cardinality mismatch: |S n Q| = " + std::to_string(out.false_positives) +
                          " but |P \\ S| = " + std::to_string(out.false_negatives) +
                          " (eps_alg differs from the true corruption rate)");
    return out;
}

bool key_step_inequality_check(const Dataset& ds, const ModelParams& params, const ActivationSpec& act,
                               double eps_alg) {
    const KeyStepSides sides = key_step_sides(ds, params, act, eps_alg);
    return sides.lhs <= sides.rhs;
}

LabReport key_step_trials(std::size_t n, std::size_t d, double eps, double nu, std::size_t trials,
                          std::uint64_t seed) {
    if (trials == 0 || n == 0 || d == 0) throw ConfigError("n, d and trials must be positive");
    if (!(eps >= 0.0 && eps < 0.5)) throw ConfigError("eps must lie in [0, 0.5)");
    const std::vector<AdversaryKind> adversaries = {AdditiveLabelOutlier{1000.0}, LabelSignFlipScale{2.0},
                                                    OracleModel{}, LeverageAttack{LeverageMode::Flip},
                                                    CovariateAndLabel{10.0}};
    const std::vector<ActivationSpec> acts = {ActivationSpec::linear(), ActivationSpec::sigmoid(),
                                              ActivationSpec::tanh(), ActivationSpec::leaky_relu(0.1),
                                              ActivationSpec::smooth_leaky_relu(0.5), ActivationSpec::relu()};
    std::vector<int> violations(trials, 0);
    std::vector<double> margins(trials, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(trials); ++t) {
        const auto ut = static_cast<std::uint64_t>(t);
        GeneratorSpec g;
        g.d = d;
        g.n = n;
        g.nu = nu;
        g.seed = derive_seed(seed, ut, 1);
        const ActivationSpec& act = acts[static_cast<std::size_t>(t) % acts.size()];
        const Dataset clean = generate_clean(g, act);
        const Dataset ds = corrupt(clean, {adversaries[static_cast<std::size_t>(t) % adversaries.size()], eps,
                                           derive_seed(seed, ut, 2)});
        CounterStream rng(seed, StreamTag::Lab, ut);
        ModelParams w{*ds.meta.w_true};
        const double scale = 2.0 * rng.next_unit();
        for (Eigen::Index i = 0; i < w.weights.size(); ++i) w.weights.data()[i] += scale * rng.next_normal();
        const KeyStepSides sides = key_step_sides(ds, w, act, eps);
        violations[static_cast<std::size_t>(t)] = sides.lhs <= sides.rhs ? 0 : 1;
        margins[static_cast<std::size_t>(t)] = sides.rhs - sides.lhs;
    }
    LabReport r{"key_step", trials,
                static_cast<double>(std::accumulate(violations.begin(), violations.end(), 0)), 0.0, std::nullopt,
                true, false,
                {{"n", n}, {"d", d}, {"eps", eps}, {"nu", nu}, {"seed", seed},
                 {"min_margin", *std::min_element(margins.begin(), margins.end())}}};
    finalize(r);
    return r;
}

LabReport binomial_helper_check(std::size_t n_max) {
    if (n_max == 0 || n_max > 60) throw ConfigError("binomial check supports 1 <= n_max <= 60");
    double worst = 0.0;
    std::size_t worst_n = 0, worst_k = 0, cases = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        std::uint64_t binom = 1;  // C(n, 0)
        std::uint64_t partial = 1;
        for (std::size_t k = 1; k <= n; ++k) {
            binom = binom * (n - k + 1) / k;
            partial += binom;
            const long double rhs = std::pow(std::numbers::e_v<long double> * static_cast<long double>(n) /
                                                 static_cast<long double>(k),
                                             static_cast<long double>(k));
            const double ratio = static_cast<double>(static_cast<long double>(partial) / rhs);
            ++cases;
            if (ratio > worst) {
                worst = ratio;
                worst_n = n;
                worst_k = k;
            }
        }
    }
    LabReport r{"helpers.binomial", cases, worst, 1.0, std::nullopt, true, false,
                {{"n_max", n_max}, {"worst_n", worst_n}, {"worst_k", worst_k}}};
    finalize(r);
    return r;
}

LabReport hadamard_helper_check(std::size_t instances, std::uint64_t seed) {
    if (instances == 0) throw ConfigError("instances must be positive");
    std::vector<double> ratios(instances);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(instances); ++t) {
        CounterStream rng(seed, StreamTag::Lab, static_cast<std::uint64_t>(t));
        const auto n = static_cast<Eigen::Index>(1 + rng.next_below(40));
        const auto d = static_cast<Eigen::Index>(1 + rng.next_below(8));
        VectorXd a(n), b(n);
        MatrixXd X(d, n);
        for (Eigen::Index i = 0; i < n; ++i) a(i) = rng.next_normal();
        for (Eigen::Index i = 0; i < n; ++i) b(i) = rng.next_normal();
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.next_normal();
        const double lhs = (X * a.cwiseProduct(b)).squaredNorm();
        const double rhs = a.cwiseAbs().maxCoeff() * a.cwiseAbs().maxCoeff() * b.squaredNorm() *
                           lambda_max_of(X * X.transpose());
        ratios[static_cast<std::size_t>(t)] = rhs > 0.0 ? lhs / rhs : 0.0;
    }
    // The inequality is tight (n = 1 attains it), so allow rounding.
    LabReport r{"helpers.hadamard", instances, *std::max_element(ratios.begin(), ratios.end()), 1.0, std::nullopt,
                true, false, {{"seed", seed}, {"rounding_slack", 1e-12}}};
    r.pass = r.empirical_stat <= 1.0 + 1e-12;
    return r;
}

}  // namespace rthresh::lab
