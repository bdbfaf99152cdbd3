#include <doctest.h>

#include <cmath>
#include <numbers>

#include "robust_thresh/errors.hpp"
#include "robust_thresh/lab.hpp"
#include "robust_thresh/rng.hpp"

using namespace rthresh;
using namespace rthresh::lab;

TEST_CASE("worst subset energy") {
    const std::vector<double> ones(10, 1.0);
    CHECK(worst_subset_energy(ones, 3) == 3.0);
    const std::vector<double> v = {1.0, -3.0, 2.0, 0.5};
    CHECK(worst_subset_energy(v, 2) == 13.0);
    CHECK_THROWS_AS(worst_subset_energy(v, 5), ConfigError);
}

TEST_CASE("chi-squared reports carry both readings") {
    const auto r = worst_subset_noise_energy(1000, 0.1, 2.0, 20, 1);
    REQUIRE(r.size() == 2);
    const double base = 30.0 * 1000 * 0.1 * std::log(10.0);
    CHECK(base == doctest::Approx(6907.755).epsilon(1e-6));
    CHECK(r[0].paper_bound == doctest::Approx(4.0 * base));
    CHECK(r[1].paper_bound == doctest::Approx(2.0 * base));
    CHECK(r[0].empirical_stat == r[1].empirical_stat);
    CHECK(r[0].pass);
    CHECK_THROWS_AS(worst_subset_noise_energy(2, 0.1, 1.0, 5, 1), ConfigError);
    CHECK_THROWS_AS(worst_subset_noise_energy(100, 0.5, 1.0, 5, 1), ConfigError);
}

TEST_CASE("subset extremes on simple matrices") {
    const MatrixXd I = MatrixXd::Identity(4, 4);
    const auto e = subset_extremes(I, 1);
    REQUIRE(e.max_top_exact);
    CHECK(*e.max_top_exact == doctest::Approx(1.0));
    CHECK(*e.min_bottom_exact == doctest::Approx(0.0));
    CHECK(e.max_top_heuristic() == doctest::Approx(1.0));
}

TEST_CASE("heuristics never beat brute force") {
    CounterStream rng(4, StreamTag::Lab, 0);
    for (int rep = 0; rep < 10; ++rep) {
        MatrixXd X(3, 12);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.next_normal();
        const auto e = subset_extremes(X, 3);
        CHECK(e.max_top_heuristic() <= *e.max_top_exact + 1e-9);
        CHECK(e.min_bottom_heuristic() >= *e.min_bottom_exact - 1e-9);
    }
}

TEST_CASE("subset eigen reports switch method at the brute-force limit") {
    const auto small = subset_eigen_extremes(12, 3, 0.25, MatrixXd::Identity(3, 3), 3, 1);
    CHECK(small[0].params_echo["method"] == "exhaustive");
    CHECK(small[0].oracle_stat.has_value());
    const auto large = subset_eigen_extremes(200, 3, 0.1, MatrixXd::Identity(3, 3), 3, 1);
    CHECK(large[0].params_echo["method"] == "heuristic_lower_bound");
    CHECK(large[0].paper_bound == doctest::Approx(10.0 * 200 * 0.1 * std::log(10.0)));
    CHECK(large[1].paper_bound == doctest::Approx(50.0));
    CHECK_FALSE(large[1].upper_bound);
}

TEST_CASE("half-space closed form") {
    const auto m0 = halfspace_closed_form(0.0);
    CHECK(m0(0, 0) == doctest::Approx(0.5));
    CHECK(m0(1, 1) == doctest::Approx(0.5));
    CHECK(m0(0, 1) == doctest::Approx(0.0));
    const auto m1 = halfspace_closed_form(std::numbers::pi / 2);
    CHECK(m1(0, 0) == doctest::Approx(0.25));
    CHECK(m1(0, 1) == doctest::Approx(1.0 / (2 * std::numbers::pi)));
}

TEST_CASE("half-space Monte Carlo error shrinks like 1/sqrt(samples)") {
    const double theta = std::numbers::pi / 3;
    const Eigen::Matrix2d ref = halfspace_closed_form(theta);
    auto err = [&](std::size_t samples) {
        double total = 0.0;
        for (std::uint64_t s = 0; s < 8; ++s)
            total += (halfspace_moment_mc(theta, samples, 100 + s).topLeftCorner(2, 2) - ref).cwiseAbs().maxCoeff();
        return total / 8;
    };
    const double coarse = err(4000), fine = err(256000);
    // An 8x reduction is expected; accept anything past 3x.
    CHECK(fine < coarse / 3.0);
    const auto reports = halfspace_second_moment(0.0, 400000, 1, 0.01);
    CHECK(reports[0].pass);
    CHECK(reports[1].pass);
    // At theta = 0 the printed bound (pi / 2) exceeds the true minimum eigenvalue (1/2).
    CHECK_FALSE(reports[2].pass);
    CHECK(reports[3].pass);
}

TEST_CASE("scaled Gaussian bound") {
    const MatrixXd S = MatrixXd::Zero(2, 5), T = MatrixXd::Ones(4, 3);
    const auto zero = scaled_gaussian_norm_check(S, T, 1.0, 10, 1);
    CHECK(zero.empirical_stat == 0.0);
    CHECK(zero.paper_bound == 0.0);
    CHECK(zero.pass);
    const MatrixXd S1 = MatrixXd::Identity(3, 3), T1 = MatrixXd::Identity(3, 3);
    CHECK(scaled_gaussian_bound(S1, T1, 2.0, 0.1) ==
          doctest::Approx(3.0 * 2.0 * std::sqrt(2.0 * std::log(2.0 * 9 / 0.1))));
    CHECK(scaled_gaussian_norm_check(4, 30, 20, 4, 0.7, 50, 3).pass);
}

TEST_CASE("helper inequalities") {
    const auto b = binomial_helper_check(30);
    CHECK(b.pass);
    CHECK(b.trials == 465);
    // k = n: 2^n / e^n is the worst ratio at n = 1 (2/e).
    CHECK(b.empirical_stat == doctest::Approx(2.0 / std::exp(1.0)));
    const auto h = hadamard_helper_check(300, 2);
    CHECK(h.pass);
    CHECK(h.empirical_stat <= 1.0 + 1e-12);
}

TEST_CASE("randomized key-step instances never violate the inequality") {
    const auto r = key_step_trials(120, 4, 0.1, 0.5, 60, 7);
    CHECK(r.empirical_stat == 0.0);
    CHECK(r.pass);
}

TEST_CASE("lab json shape") {
    const auto j = to_json(binomial_helper_check(5));
    CHECK(j["lemma_id"] == "helpers.binomial");
    CHECK(j["bound_kind"] == "upper");
    CHECK(j.contains("params_echo"));
}
