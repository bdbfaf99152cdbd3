#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rthresh {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid FitConfig / GeneratorSpec / AdversarySpec / lab parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Shape disagreement between matrices handed to an operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A non-finite iterate or loss. `iteration` is the offending iterate index.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t iteration)
        : Error(what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

class SingularSystemError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rthresh
