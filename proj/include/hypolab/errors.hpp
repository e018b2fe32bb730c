#pragma once

#include <stdexcept>
#include <string>

namespace hypolab {

// Argument outside the domain where a closed form or zone is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Value outside the range of a monotone function (inverse lookups).
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// Characteristic polynomial has a root with non-negligible imaginary part.
class HyperbolicityViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two characteristic roots closer than the configured separation margin.
class NearMultipleRoot : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Second diagonalizer is too far from the identity to be trusted.
class DiagonalizerIllConditioned : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Integrator step dropped below the hard floor.
class StiffnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Regression without enough usable points.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Experiment configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace hypolab
