#pragma once

#include <stdexcept>
#include <string>

namespace esadapt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularInertia : public Error {
public:
    using Error::Error;
};

class NotHurwitz : public Error {
public:
    using Error::Error;
};

class LyapunovSolveFailed : public Error {
public:
    using Error::Error;
};

class IllConditioned : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyTrace : public Error {
public:
    using Error::Error;
};

/// State left the physical envelope (non-finite or above the blowup threshold).
class NumericalBlowup : public Error {
public:
    using Error::Error;
};

/// Unknown key or wrong value type in a configuration document.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Well-formed configuration that breaks an invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace esadapt
