#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/errors.hpp"
#include "robust_thresh/synth.hpp"

using namespace rthresh;

namespace {
GeneratorSpec small_spec() {
    GeneratorSpec g;
    g.d = 6;
    g.n = 400;
    g.nu = 0.2;
    g.seed = 123;
    return g;
}

double op_norm(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::size_t count_outliers(const Dataset& ds) {
    std::size_t c = 0;
    for (bool in : *ds.inlier_mask) c += in ? 0 : 1;
    return c;
}
}  // namespace

TEST_CASE("generation is deterministic and independent of thread count") {
    const auto g = small_spec();
    omp_set_num_threads(1);
    const Dataset a = generate_clean(g, ActivationSpec::tanh());
    omp_set_num_threads(4);
    const Dataset b = generate_clean(g, ActivationSpec::tanh());
    omp_set_num_threads(omp_get_num_procs());
    CHECK(a.covariates == b.covariates);
    CHECK(a.targets == b.targets);
    CHECK(*a.meta.w_true == *b.meta.w_true);

    auto g2 = g;
    g2.seed = 124;
    CHECK(generate_clean(g2, ActivationSpec::tanh()).covariates != a.covariates);
}

TEST_CASE("clean labels follow the model") {
    auto g = small_spec();
    g.nu = 0.0;
    g.k = 2;
    const Dataset ds = generate_clean(g, ActivationSpec::sigmoid());
    const MatrixXd& W = *ds.meta.w_true;
    CHECK(W.norm() == doctest::Approx(1.0));
    for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index k = 0; k < 2; ++k)
            CHECK(ds.targets(k, i) == doctest::Approx(act_value(ActivationSpec::sigmoid(), W.row(k).dot(ds.covariates.col(i)))));
    CHECK(validate_dataset(ds).empty());
}

TEST_CASE("second moment of each covariate law is close to identity") {
    for (auto law : {CovariateLaw::Gaussian, CovariateLaw::Rademacher, CovariateLaw::UniformBall}) {
        GeneratorSpec g;
        g.d = 10;
        g.n = 100000;
        g.law = law;
        g.seed = 5;
        const Dataset ds = generate_clean(g, ActivationSpec::linear());
        const MatrixXd m = ds.covariates * ds.covariates.transpose() / static_cast<double>(g.n);
        CHECK(op_norm(m - MatrixXd::Identity(10, 10)) <= 0.05);
    }
}

TEST_CASE("geometric sigma") {
    const MatrixXd s = sigma_matrix(SigmaDiagGeometric{100.0}, 3);
    CHECK(s(0, 0) == doctest::Approx(1.0));
    CHECK(s(1, 1) == doctest::Approx(0.1));
    CHECK(s(2, 2) == doctest::Approx(0.01));
    CHECK(spectrum_of(s).kappa == doctest::Approx(100.0));
    GeneratorSpec g;
    g.d = 3;
    g.n = 100000;
    g.sigma = SigmaDiagGeometric{100.0};
    const Dataset ds = generate_clean(g, ActivationSpec::linear());
    const MatrixXd m = ds.covariates * ds.covariates.transpose() / static_cast<double>(g.n);
    CHECK(op_norm(m - s) <= 0.02);
    CHECK(describe_sigma(SigmaDiagGeometric{100.0}) == "diag_geo:100");
}

TEST_CASE("non PSD sigma is rejected with the eigenvalue") {
    GeneratorSpec g = small_spec();
    g.d = 2;
    MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    g.sigma = bad;
    try {
        generate_clean(g, ActivationSpec::linear());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        const auto at = msg.find("eigenvalue ");
        REQUIRE(at != std::string::npos);
        CHECK(std::stod(msg.substr(at + 11)) == doctest::Approx(-1.0));
    }
}

TEST_CASE("clipping bounds clean covariates") {
    auto g = small_spec();
    g.clip = 1.5;
    const Dataset ds = generate_clean(g, ActivationSpec::linear());
    for (Eigen::Index i = 0; i < ds.covariates.cols(); ++i) CHECK(ds.covariates.col(i).norm() <= 1.5);
}

TEST_CASE("adversaries use the exact budget and leave inliers untouched") {
    const auto g = small_spec();
    const Dataset clean = generate_clean(g, ActivationSpec::linear());
    const std::vector<AdversaryKind> kinds = {LabelSignFlipScale{2.0}, AdditiveLabelOutlier{50.0}, OracleModel{},
                                              OracleModel{std::nullopt, 1.0, 0.5}, LeverageAttack{LeverageMode::Flip},
                                              LeverageAttack{LeverageMode::Orthogonal}, CovariateAndLabel{7.0}};
    for (const auto& kind : kinds) {
        for (double eps : {0.0, 0.05, 0.1, 0.33, 0.49}) {
            const Dataset ds = corrupt(clean, {kind, eps, 9});
            CHECK(count_outliers(ds) == corruption_count(eps, g.n));
            CHECK(validate_dataset(ds).empty());
            for (std::size_t i = 0; i < g.n; ++i) {
                const auto c = static_cast<Eigen::Index>(i);
                if ((*ds.inlier_mask)[i]) {
                    CHECK(ds.covariates.col(c) == clean.covariates.col(c));
                    CHECK(ds.targets.col(c) == clean.targets.col(c));
                }
            }
        }
    }
    CHECK_THROWS_AS(corrupt(clean, {AdditiveLabelOutlier{}, 0.5, 1}), ConfigError);
}

TEST_CASE("adversary label rules") {
    auto g = small_spec();
    g.nu = 0.0;
    const Dataset clean = generate_clean(g, ActivationSpec::linear());
    const MatrixXd& W = *clean.meta.w_true;
    const Dataset flip = corrupt(clean, {LabelSignFlipScale{3.0}, 0.1, 1});
    const Dataset add = corrupt(clean, {AdditiveLabelOutlier{1000.0}, 0.1, 1});
    const Dataset neg = corrupt(clean, {OracleModel{}, 0.1, 1});
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        if (!(*flip.inlier_mask)[i]) CHECK(flip.targets(0, c) == doctest::Approx(-3.0 * clean.targets(0, c)));
        if (!(*add.inlier_mask)[i]) CHECK(add.targets(0, c) == doctest::Approx(clean.targets(0, c) + 1000.0));
        if (!(*neg.inlier_mask)[i]) CHECK(neg.targets(0, c) == doctest::Approx(-W.row(0).dot(clean.covariates.col(c))));
    }
}

TEST_CASE("leverage attack targets the largest-norm samples") {
    const Dataset clean = generate_clean(small_spec(), ActivationSpec::linear());
    const Dataset ds = corrupt(clean, {LeverageAttack{LeverageMode::Flip}, 0.1, 1});
    double min_out = 1e300, max_in = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double nrm = ds.covariates.col(static_cast<Eigen::Index>(i)).norm();
        if ((*ds.inlier_mask)[i])
            max_in = std::max(max_in, nrm);
        else
            min_out = std::min(min_out, nrm);
    }
    CHECK(min_out >= max_in);
}

TEST_CASE("covariate attack respects its norm bound") {
    const Dataset clean = generate_clean(small_spec(), ActivationSpec::sigmoid());
    const Dataset ds = corrupt(clean, {CovariateAndLabel{4.0}, 0.2, 3});
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (!(*ds.inlier_mask)[i]) CHECK(ds.covariates.col(static_cast<Eigen::Index>(i)).norm() <= 4.0);
    CHECK(ds.meta.B == 4.0);
}

TEST_CASE("adversary strings round trip") {
    for (const char* s : {"none", "label_flip:2", "additive:1000", "oracle_model:neg", "oracle_model:scale:0.5",
                          "oracle_model:shift:0.5", "leverage:flip", "leverage:orthogonal", "covariate_label:10"})
        CHECK(format_adversary(parse_adversary(s)) == s);
    CHECK_THROWS_AS(parse_adversary("teleport"), ConfigError);
}
