#pragma once

#include <stdexcept>
#include <string>

namespace tsr {

// Base of every error thrown by the toolkit. Each subclass corresponds to a
// failure kind callers may want to distinguish (CLI exit codes, tests).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OverlapError : public Error { using Error::Error; };
class InvalidGrid : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class PlacementError : public Error { using Error::Error; };
class MissingQuad : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class LengthMismatch : public Error { using Error::Error; };
class IndexError : public Error { using Error::Error; };
class EmptyInput : public Error { using Error::Error; };
class NonFiniteLoss : public Error { using Error::Error; };

// Raised for bad user configuration; the CLI maps it to exit code 2.
class ConfigError : public Error { using Error::Error; };

} // namespace tsr
