#pragma once

#include <stdexcept>
#include <string>

namespace cmv {

/// Non-invertible, inverted, or otherwise unusable deformation state.
class InvalidKinematics : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EquilibriumNotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cmv
