#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "robust_thresh/errors.hpp"
#include "robust_thresh/io.hpp"
#include "robust_thresh/synth.hpp"

using namespace rthresh;

TEST_CASE("corruption counts use floor") {
    CHECK(corruption_count(0.1, 2000) == 200);
    CHECK(corruption_count(0.1, 15) == 1);
    CHECK(corruption_count(0.3, 10) == 3);  // 0.3 * 10 is 2.9999999999999996 in binary
    CHECK(corruption_count(0.0, 100) == 0);
    CHECK(retained_count(0.1, 15) == 14);
    for (std::size_t n = 1; n < 300; ++n)
        for (double eps : {0.05, 0.1, 0.2, 0.25, 0.4}) {
            const std::size_t k = retained_count(eps, n);
            CHECK(static_cast<double>(k) >= (1.0 - eps) * static_cast<double>(n) - 1e-9);
            CHECK(static_cast<double>(k) < (1.0 - eps) * static_cast<double>(n) + 1.0);
        }
}

TEST_CASE("dataset validation messages") {
    Dataset ds;
    ds.covariates = MatrixXd::Ones(3, 5);
    ds.targets = MatrixXd::Ones(1, 4);
    auto errs = validate_dataset(ds);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0] == "dimension mismatch");

    ds.targets = MatrixXd::Ones(1, 5);
    ds.meta.eps = 0.2;
    ds.inlier_mask = std::vector<bool>{true, false, false, true, true};
    errs = validate_dataset(ds);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0] == "corruption budget exceeded");

    ds.inlier_mask = std::vector<bool>{true, false, true, true, true};
    CHECK(validate_dataset(ds).empty());
}

TEST_CASE("spectrum of a matrix") {
    MatrixXd m = MatrixXd::Zero(2, 2);
    m.diagonal() << 1.0, 4.0;
    const auto s = spectrum_of(m);
    CHECK(s.lambda_min == doctest::Approx(1.0));
    CHECK(s.lambda_max == doctest::Approx(4.0));
    CHECK(s.kappa == doctest::Approx(4.0));
    CHECK(spectrum_of(MatrixXd::Identity(3, 3) * 2.0).kappa == 1.0);
    CHECK_THROWS_AS(SpectrumInfo::from_bounds(0.0, 1.0), ConfigError);
}

TEST_CASE("fit config validation") {
    FitConfig cfg;
    cfg.eps_alg = 0.5;
    CHECK_THROWS_AS(validate_fit_config(cfg), ConfigError);
    cfg.eps_alg = 0.1;
    cfg.eta = -1.0;
    CHECK_THROWS_AS(validate_fit_config(cfg), ConfigError);
    cfg.eta.reset();
    cfg.max_iters = 0;
    CHECK_THROWS_AS(validate_fit_config(cfg), ConfigError);
}

TEST_CASE("dataset round trip is bit exact") {
    GeneratorSpec g;
    g.d = 4;
    g.n = 50;
    g.k = 2;
    g.nu = 0.3;
    g.seed = 17;
    const Dataset clean = generate_clean(g, ActivationSpec::sigmoid());
    const Dataset ds = corrupt(clean, {LabelSignFlipScale{3.0}, 0.2, 5});
    const auto dir = std::filesystem::temp_directory_path() / "rt_io_roundtrip";
    std::filesystem::remove_all(dir);
    write_dataset(ds, dir);
    const Dataset back = read_dataset(dir);
    CHECK(back.covariates == ds.covariates);
    CHECK(back.targets == ds.targets);
    REQUIRE(back.inlier_mask);
    CHECK(*back.inlier_mask == *ds.inlier_mask);
    CHECK(back.meta.seed == ds.meta.seed);
    CHECK(back.meta.eps == ds.meta.eps);
    CHECK(back.meta.nu == ds.meta.nu);
    CHECK(back.meta.adversary == ds.meta.adversary);
    CHECK(back.meta.activation == ds.meta.activation);
    REQUIRE(back.meta.w_true);
    CHECK(*back.meta.w_true == *ds.meta.w_true);
    std::filesystem::remove_all(dir);
}

TEST_CASE("io errors carry the path") {
    const auto missing = std::filesystem::temp_directory_path() / "rt_no_such_dir_xyz";
    try {
        read_dataset(missing);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("rt_no_such_dir_xyz") != std::string::npos);
    }
}

TEST_CASE("fit config json round trip") {
    FitConfig cfg;
    cfg.eps_alg = 0.15;
    cfg.eta = 0.02;
    cfg.max_iters = 77;
    cfg.init = RandomBallInit{0.1};
    cfg.seed = 99;
    cfg.radius_ref = RadiusRef::TrueNorm;
    cfg.restarts = 3;
    const FitConfig back = fit_config_from_json(to_json(cfg));
    CHECK(back.eps_alg == cfg.eps_alg);
    CHECK(back.eta == cfg.eta);
    CHECK(back.max_iters == cfg.max_iters);
    REQUIRE(std::holds_alternative<RandomBallInit>(back.init));
    CHECK(std::get<RandomBallInit>(back.init).radius_scale == 0.1);
    CHECK(back.seed == 99);
    CHECK(back.radius_ref == RadiusRef::TrueNorm);
    CHECK(back.restarts == 3);
}
