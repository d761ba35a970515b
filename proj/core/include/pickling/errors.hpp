#pragma once

#include <stdexcept>
#include <string>

namespace pickling {

// Root of every error the library throws. The category decides the CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument values or malformed data (exit code 2).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Raised by dataset generation, CSV parsing, splitting.
class DataError : public Error {
public:
    using Error::Error;
};

// Model preconditions, untrained models, unreadable model files (exit code 3).
class ModelError : public Error {
public:
    using Error::Error;
};

// Bad configuration or incompatible models (exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Every tank has beta * Fe2 >= 1, so no acid attack happens anywhere.
class SaturatedBath : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

}  // namespace pickling
