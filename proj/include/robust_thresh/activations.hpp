#pragma once

#include <string>
#include <string_view>

#include "robust_thresh/types.hpp"

namespace rthresh {

// sigma(z). Stable for |z| up to at least 700.
double act_value(const ActivationSpec& spec, double z);

// sigma'(z). ReLU and leaky ReLU return the right-derivative (1) at the kink.
double act_deriv(const ActivationSpec& spec, double z);

// A lower bound on sigma'(z) over |z| <= radius.
double act_gamma_floor(const ActivationSpec& spec, double radius);

// Throws ConfigError if the activation constants are out of range.
void validate_activation(const ActivationSpec& spec);

// Parses "linear", "sigmoid", "tanh", "leaky_relu:0.1", "smooth_leaky_relu:0.5", "relu".
ActivationSpec parse_activation(std::string_view text);
std::string format_activation(const ActivationSpec& spec);

}  // namespace rthresh
