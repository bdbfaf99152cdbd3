#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "robust_thresh/types.hpp"

namespace rthresh {

struct SigmaIdentity {};
// Eigenvalues geometrically spaced from 1/kappa to 1.
struct SigmaDiagGeometric {
    double kappa = 1.0;
};
using SigmaSpec = std::variant<SigmaIdentity, SigmaDiagGeometric, MatrixXd>;

enum class CovariateLaw { Gaussian, Rademacher, UniformBall };

// Truth drawn uniformly on the sphere of Frobenius radius R.
struct RandomUnitScaled {
    double R = 1.0;
};
using TruthSpec = std::variant<RandomUnitScaled, ModelParams>;

struct GeneratorSpec {
    std::size_t d = 10;
    std::size_t n = 1000;
    std::size_t k = 1;
    SigmaSpec sigma = SigmaIdentity{};
    CovariateLaw law = CovariateLaw::Gaussian;
    double nu = 0.0;
    TruthSpec w_true = RandomUnitScaled{1.0};
    std::uint64_t seed = 0;
    // Rescale clean covariates to norm <= clip when set (bounded sub-Gaussian).
    std::optional<double> clip;
};

// The explicit d x d second-moment matrix for a SigmaSpec.
MatrixXd sigma_matrix(const SigmaSpec& sigma, std::size_t d);
std::string describe_sigma(const SigmaSpec& sigma);
SigmaSpec parse_sigma(std::string_view text);

CovariateLaw parse_law(std::string_view text);
std::string format_law(CovariateLaw law);

// y_i = sigma(W* x_i) + xi_i with xi_i ~ N(0, nu^2 I). Every sample draws from
// its own counter stream, so the output is independent of thread count.
Dataset generate_clean(const GeneratorSpec& g, const ActivationSpec& act);

struct LabelSignFlipScale {
    double factor = 1.0;
};
struct AdditiveLabelOutlier {
    double magnitude = 1000.0;
};
// Relabels with sigma(W_adv x) + fresh noise. Without an explicit w_adv the
// adversary uses W_adv = scale * W* + shift * ||W*|| * u for a random unit u.
struct OracleModel {
    std::optional<ModelParams> w_adv;
    double scale = -1.0;
    double shift = 0.0;
};
enum class LeverageMode { Flip, Orthogonal };
// Targets the floor(eps N) samples of largest norm.
struct LeverageAttack {
    LeverageMode mode = LeverageMode::Flip;
};
// Replaces covariates with points of norm B near a direction orthogonal to W*
// and labels them with a model tilted towards that direction.
struct CovariateAndLabel {
    double B = 10.0;
};
struct NoAdversary {};

using AdversaryKind = std::variant<NoAdversary, LabelSignFlipScale, AdditiveLabelOutlier, OracleModel,
                                   LeverageAttack, CovariateAndLabel>;

struct AdversarySpec {
    AdversaryKind kind = NoAdversary{};
    double eps_true = 0.0;
    std::uint64_t seed = 0;
};

// "none", "label_flip:F", "additive:M", "oracle_model:neg", "oracle_model:scale:C",
// "oracle_model:shift:S", "leverage:flip", "leverage:orthogonal", "covariate_label:B"
AdversaryKind parse_adversary(std::string_view text);
std::string format_adversary(const AdversaryKind& kind);

// Strong contamination: exactly floor(eps_true N) samples are modified.
Dataset corrupt(const Dataset& ds, const AdversarySpec& adv);

}  // namespace rthresh
