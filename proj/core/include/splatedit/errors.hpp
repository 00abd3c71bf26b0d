#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace splatedit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed file layout (e.g. a PLY header missing a field).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that carries invalid values (NaN, Inf, ...).
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    explicit DataError(const std::string& what) : Error(what) {}

    std::size_t index() const { return index_; }

private:
    std::size_t index_ = 0;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// The editing region projects to nothing in any view.
class EmptyRegionError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Network-level failure talking to the inpainting service. Retriable.
class TransportError : public Error {
public:
    using Error::Error;
};

/// The inpainting service answered with something that violates the protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace splatedit
