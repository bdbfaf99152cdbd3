#include <doctest.h>

#include <cmath>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/errors.hpp"

using namespace rthresh;

namespace {
std::vector<ActivationSpec> all_kinds() {
    return {ActivationSpec::linear(), ActivationSpec::sigmoid(), ActivationSpec::tanh(),
            ActivationSpec::leaky_relu(0.1), ActivationSpec::smooth_leaky_relu(0.5), ActivationSpec::relu()};
}
}  // namespace

TEST_CASE("activation values") {
    CHECK(act_value(ActivationSpec::linear(), -2.5) == -2.5);
    CHECK(act_value(ActivationSpec::sigmoid(), 0.0) == doctest::Approx(0.5));
    CHECK(act_value(ActivationSpec::tanh(), 1.0) == doctest::Approx(std::tanh(1.0)));
    CHECK(act_value(ActivationSpec::leaky_relu(0.1), -2.0) == doctest::Approx(-0.2));
    CHECK(act_value(ActivationSpec::relu(), -2.0) == 0.0);
    // 0.5 * 0 + 0.5 * log 2
    CHECK(act_value(ActivationSpec::smooth_leaky_relu(0.5), 0.0) == doctest::Approx(0.34657359).epsilon(1e-8));
    CHECK(act_value(ActivationSpec::sigmoid(), -800.0) >= 0.0);
    CHECK(std::isfinite(act_value(ActivationSpec::smooth_leaky_relu(0.5), 800.0)));
    CHECK(act_value(ActivationSpec::smooth_leaky_relu(0.5), 800.0) == doctest::Approx(800.0));
}

TEST_CASE("derivatives match central differences away from kinks") {
    const double h = 1e-5;
    for (const auto& a : all_kinds()) {
        for (double z : {-3.0, -1.2, -0.3, 0.4, 1.7, 2.9}) {
            const double fd = (act_value(a, z + h) - act_value(a, z - h)) / (2 * h);
            CHECK(act_deriv(a, z) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
    CHECK(act_deriv(ActivationSpec::relu(), 0.0) == 1.0);
    CHECK(act_deriv(ActivationSpec::leaky_relu(0.2), 0.0) == 1.0);
}

TEST_CASE("gamma floors") {
    CHECK(act_gamma_floor(ActivationSpec::linear(), 10.0) == 1.0);
    // sigmoid'(2) = e^-2 / (1 + e^-2)^2
    const double e2 = std::exp(-2.0);
    CHECK(act_gamma_floor(ActivationSpec::sigmoid(), 2.0) == doctest::Approx(e2 / ((1 + e2) * (1 + e2))));
    CHECK(act_gamma_floor(ActivationSpec::sigmoid(), 2.0) == doctest::Approx(0.10499).epsilon(1e-4));
    CHECK(act_gamma_floor(ActivationSpec::leaky_relu(0.1), 5.0) == doctest::Approx(0.1));
    CHECK(act_gamma_floor(ActivationSpec::smooth_leaky_relu(0.3), 5.0) == doctest::Approx(0.3));
    CHECK(act_gamma_floor(ActivationSpec::relu(), 1.0) == 0.0);
    for (const auto& a : all_kinds())
        for (double z = -2.0; z <= 2.0; z += 0.01) CHECK(act_deriv(a, z) >= act_gamma_floor(a, 2.0) - 1e-15);
}

TEST_CASE("parse and format round trip") {
    for (const auto& a : all_kinds()) {
        const auto b = parse_activation(format_activation(a));
        CHECK(b.kind == a.kind);
        CHECK(b.gamma == a.gamma);
        CHECK(b.alpha == a.alpha);
    }
    CHECK(parse_activation("leaky_relu").gamma == doctest::Approx(0.1));
    CHECK(parse_activation("smooth_leaky_relu").alpha == doctest::Approx(0.5));
    CHECK_THROWS_AS(parse_activation("softmax"), ConfigError);
    CHECK_THROWS_AS(parse_activation("leaky_relu:1.5"), ConfigError);
    CHECK_THROWS_AS(parse_activation("leaky_relu:0"), ConfigError);
}
