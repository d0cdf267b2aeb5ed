#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace thinlayer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid layer stack, thin-layer family or grid request.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Layer or family index outside the admissible range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Field staggering, grid or shape mismatch between operands.
class FieldError : public Error {
public:
    using Error::Error;
};

/// A direct solve whose residual exceeded the acceptance threshold.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Requested time step exceeds the advective stability limit.
class CflError : public Error {
public:
    CflError(const std::string& what, double suggested_dt)
        : Error(what), suggested_dt_(suggested_dt) {}
    [[nodiscard]] double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double suggested_dt_;
};

/// Non-finite values appeared during time integration.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, long step) : Error(what), step_(step) {}
    [[nodiscard]] long step() const noexcept { return step_; }

private:
    long step_;
};

/// Configuration errors. Carries every problem found, not only the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Malformed snapshot or trajectory file.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace thinlayer
