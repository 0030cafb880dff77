#pragma once

#include <stdexcept>
#include <string>

namespace darkchain {

// Base for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI error record.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidGeometry : Error {
    explicit InvalidGeometry(const std::string& w) : Error("invalid-geometry", w) {}
};

struct InvalidDipole : Error {
    explicit InvalidDipole(const std::string& w) : Error("invalid-dipole", w) {}
};

struct InvalidParameter : Error {
    explicit InvalidParameter(const std::string& w) : Error("invalid-parameter", w) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error("numerical-error", w) {}
};

struct MultipleSteadyStates : Error {
    MultipleSteadyStates(const std::string& w, int null_dim)
        : Error("multiple-steady-states", w), null_dimension(null_dim) {}
    int null_dimension;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error("config-error", w) {}
};

}  // namespace darkchain
