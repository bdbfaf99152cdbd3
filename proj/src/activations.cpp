#include "robust_thresh/activations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "robust_thresh/errors.hpp"

namespace rthresh {

ActivationSpec ActivationSpec::linear() { return {ActivationKind::Linear, 0.0, 0.0, 1.0}; }
ActivationSpec ActivationSpec::sigmoid() { return {ActivationKind::Sigmoid, 0.0, 0.0, 0.25}; }
ActivationSpec ActivationSpec::tanh() { return {ActivationKind::Tanh, 0.0, 0.0, 1.0}; }
ActivationSpec ActivationSpec::leaky_relu(double gamma) {
    return {ActivationKind::LeakyRelu, gamma, 0.0, 1.0};
}
ActivationSpec ActivationSpec::smooth_leaky_relu(double alpha) {
    return {ActivationKind::SmoothLeakyRelu, alpha, alpha, 1.0};
}
ActivationSpec ActivationSpec::relu() { return {ActivationKind::Relu, 0.0, 0.0, 1.0}; }

namespace {

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

}  // namespace

double act_value(const ActivationSpec& spec, double z) {
    switch (spec.kind) {
        case ActivationKind::Linear: return z;
        case ActivationKind::Sigmoid: return logistic(z);
        case ActivationKind::Tanh: return std::tanh(z);
        case ActivationKind::LeakyRelu: return z >= 0.0 ? z : spec.gamma * z;
        case ActivationKind::SmoothLeakyRelu:
            return spec.alpha * z + (1.0 - spec.alpha) * softplus(z);
        case ActivationKind::Relu: return z > 0.0 ? z : 0.0;
    }
    return z;
}

double act_deriv(const ActivationSpec& spec, double z) {
    switch (spec.kind) {
        case ActivationKind::Linear: return 1.0;
        case ActivationKind::Sigmoid: {
            const double s = logistic(z);
            return s * (1.0 - s);
        }
        case ActivationKind::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case ActivationKind::LeakyRelu: return z >= 0.0 ? 1.0 : spec.gamma;
        case ActivationKind::SmoothLeakyRelu:
            return spec.alpha + (1.0 - spec.alpha) * logistic(z);
        case ActivationKind::Relu: return z >= 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

double act_gamma_floor(const ActivationSpec& spec, double radius) {
    switch (spec.kind) {
        case ActivationKind::Linear: return 1.0;
        // Both derivatives are even and decrease in |z|.
        case ActivationKind::Sigmoid:
        case ActivationKind::Tanh: return act_deriv(spec, radius);
        case ActivationKind::LeakyRelu: return spec.gamma;
        // sigma' = alpha + (1 - alpha) * logistic(z) > alpha everywhere.
        case ActivationKind::SmoothLeakyRelu: return spec.alpha;
        case ActivationKind::Relu: return 0.0;
    }
    return 0.0;
}

void validate_activation(const ActivationSpec& spec) {
    switch (spec.kind) {
        case ActivationKind::LeakyRelu:
            if (!(spec.gamma > 0.0 && spec.gamma < 1.0))
                throw ConfigError("leaky_relu slope must lie in (0, 1)");
            break;
        case ActivationKind::SmoothLeakyRelu:
            if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
                throw ConfigError("smooth_leaky_relu alpha must lie in (0, 1)");
            break;
        default: break;
    }
    if (!(spec.lip > 0.0) || !std::isfinite(spec.lip))
        throw ConfigError("activation Lipschitz constant must be positive");
}

ActivationSpec parse_activation(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    double param = 0.0;
    const bool has_param = colon != std::string_view::npos;
    if (has_param) {
        const std::string_view arg = text.substr(colon + 1);
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), param);
        if (ec != std::errc() || ptr != arg.data() + arg.size())
            throw ConfigError("bad activation parameter: " + std::string(text));
    }
    ActivationSpec spec;
    if (name == "linear") spec = ActivationSpec::linear();
    else if (name == "sigmoid") spec = ActivationSpec::sigmoid();
    else if (name == "tanh") spec = ActivationSpec::tanh();
    else if (name == "relu") spec = ActivationSpec::relu();
    else if (name == "leaky_relu") spec = ActivationSpec::leaky_relu(has_param ? param : 0.1);
    else if (name == "smooth_leaky_relu")
        spec = ActivationSpec::smooth_leaky_relu(has_param ? param : 0.5);
    else throw ConfigError("unknown activation: " + std::string(text));
    validate_activation(spec);
    return spec;
}

std::string format_activation(const ActivationSpec& spec) {
    char buf[64];
    switch (spec.kind) {
        case ActivationKind::Linear: return "linear";
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::Relu: return "relu";
        case ActivationKind::LeakyRelu: {
            auto res = std::to_chars(buf, buf + sizeof buf, spec.gamma);
            return "leaky_relu:" + std::string(buf, res.ptr);
        }
        case ActivationKind::SmoothLeakyRelu: {
            auto res = std::to_chars(buf, buf + sizeof buf, spec.alpha);
            return "smooth_leaky_relu:" + std::string(buf, res.ptr);
        }
    }
    return "linear";
}

}  // namespace rthresh
