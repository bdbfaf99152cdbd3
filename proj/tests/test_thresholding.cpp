#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "robust_thresh/errors.hpp"
#include "robust_thresh/kernels.hpp"
#include "robust_thresh/lab.hpp"
#include "robust_thresh/rng.hpp"
#include "robust_thresh/synth.hpp"
#include "robust_thresh/thresholding.hpp"

using namespace rthresh;

namespace {
// Smallest subset sum by enumerating every k-subset.
double brute_min(const std::vector<double>& z, std::size_t k) {
    const std::size_t n = z.size();
    double best = 1e300;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) s += z[i];
        best = std::min(best, s);
    }
    return best;
}
}  // namespace

TEST_CASE("hard threshold examples") {
    const std::vector<double> z = {5.0, 1.0, 3.0, 2.0};
    const auto s = hard_threshold(std::span<const double>(z), 2);
    CHECK(s.indices == std::vector<std::size_t>{1, 3});
    CHECK(s.losses_at_selection == std::vector<double>{1.0, 2.0});
    CHECK(s.loss_sum() == 3.0);
    // Ties go to the lower index.
    const std::vector<double> t = {1.0, 1.0, 1.0, 0.5};
    CHECK(hard_threshold(std::span<const double>(t), 2).indices == std::vector<std::size_t>{0, 3});
    CHECK(hard_threshold(std::span<const double>(t), 4).indices.size() == 4);
    CHECK_THROWS_AS(hard_threshold(std::span<const double>(t), 0), ConfigError);
    CHECK_THROWS_AS(hard_threshold(std::span<const double>(t), 5), ConfigError);
}

TEST_CASE("hard threshold is an exact subset minimizer") {
    CounterStream rng(1, StreamTag::Lab, 0);
    for (std::size_t n = 1; n <= 10; ++n)
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> z(n);
            // Half the vectors are drawn from a small grid to force ties.
            for (double& v : z) v = rep % 2 ? rng.next_unit() : static_cast<double>(rng.next_below(3));
            for (std::size_t k = 1; k <= n; ++k) {
                const auto s = hard_threshold(std::span<const double>(z), k);
                CHECK(s.size() == k);
                CHECK(s.loss_sum() == doctest::Approx(brute_min(z, k)).epsilon(1e-12));
                CHECK(std::is_sorted(s.indices.begin(), s.indices.end()));
                std::vector<bool> in(n, false);
                for (std::size_t i : s.indices) in[i] = true;
                double max_in = -1.0, min_out = 1e300;
                for (std::size_t i = 0; i < n; ++i) {
                    if (in[i])
                        max_in = std::max(max_in, z[i]);
                    else
                        min_out = std::min(min_out, z[i]);
                }
                CHECK(max_in <= min_out);
            }
        }
}

TEST_CASE("selection kernels agree with the serial sort") {
    CounterStream rng(2, StreamTag::Lab, 0);
    for (std::size_t n : {1u, 7u, 100u, 5000u}) {
        std::vector<double> z(n);
        for (double& v : z) v = static_cast<double>(rng.next_below(50));
        for (std::size_t k : {std::size_t{1}, n / 2 + 1, n}) {
            CHECK(kernels::serial::smallest_k(z, k) == kernels::parallel::smallest_k(z, k));
        }
    }
}

TEST_CASE("permutation equivariance") {
    CounterStream rng(3, StreamTag::Lab, 0);
    const std::size_t n = 200, k = 150;
    std::vector<double> z(n);
    for (double& v : z) v = rng.next_normal();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.next_below(i + 1)]);
    std::vector<double> zp(n);
    for (std::size_t i = 0; i < n; ++i) zp[i] = z[perm[i]];
    const auto a = hard_threshold(std::span<const double>(z), k);
    const auto b = hard_threshold(std::span<const double>(zp), k);
    std::vector<std::size_t> mapped;
    for (std::size_t i : b.indices) mapped.push_back(perm[i]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == a.indices);
}

TEST_CASE("composition counts") {
    RetainedSet s;
    s.indices = {0, 2, 3};
    const auto c = composition(s, {true, true, false, true});
    CHECK(c.true_positives == 2);
    CHECK(c.false_positives == 1);
}

TEST_CASE("non-finite losses raise divergence") {
    GeneratorSpec g;
    g.d = 2;
    g.n = 10;
    const Dataset ds = generate_clean(g, ActivationSpec::linear());
    ModelParams w(MatrixXd::Constant(1, 2, std::numeric_limits<double>::infinity()));
    CHECK_THROWS_AS(per_sample_losses(w, ActivationSpec::linear(), ds, true, 4), DivergenceError);
    try {
        per_sample_losses(w, ActivationSpec::linear(), ds, false, 4);
    } catch (const DivergenceError& e) {
        CHECK(e.iteration() == 4);
    }
}

TEST_CASE("key step inequality at random parameters") {
    GeneratorSpec g;
    g.d = 4;
    g.n = 60;
    g.nu = 0.3;
    g.seed = 8;
    const Dataset clean = generate_clean(g, ActivationSpec::linear());
    const Dataset ds = corrupt(clean, {AdditiveLabelOutlier{3.0}, 0.2, 2});
    CounterStream rng(4, StreamTag::Lab, 0);
    for (int rep = 0; rep < 50; ++rep) {
        ModelParams w(MatrixXd(1, 4));
        for (Eigen::Index j = 0; j < 4; ++j) w.weights(0, j) = 2.0 * rng.next_normal();
        const auto sides = lab::key_step_sides(ds, w, ActivationSpec::linear(), 0.2);
        CHECK(sides.false_positives == sides.false_negatives);
        CHECK(sides.lhs <= sides.rhs);
    }
    CHECK_THROWS_AS(lab::key_step_sides(ds, ModelParams::zeros(1, 4), ActivationSpec::linear(), 0.3), ConfigError);
}
