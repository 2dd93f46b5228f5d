#pragma once

#include <stdexcept>
#include <string>

namespace mfglab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid grid, schedule, or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical parameter (width, step, exponent) is out of range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of a function (nonpositive density, NaN, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The grid resolution makes a spectral multiplier overflow.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Malformed field or configuration file.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mfglab
