#pragma once

#include <stdexcept>
#include <string>

namespace uq {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

// CSV / file ingestion.
struct ParseError : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};
struct InconsistentShape : Error {
    using Error::Error;
};

struct ClassTooSmall : Error {
    using Error::Error;
};
struct DegenerateCovariance : Error {
    using Error::Error;
};

struct LabelOutOfRange : Error {
    using Error::Error;
};
struct ZeroLogitVector : Error {
    using Error::Error;
};
struct TraceMismatch : Error {
    using Error::Error;
};
struct EpochOutOfRange : Error {
    using Error::Error;
};

struct InsufficientSamples : Error {
    using Error::Error;
};
struct EmptyBatch : Error {
    using Error::Error;
};

struct EmptyPopulation : Error {
    using Error::Error;
};
struct EmptyGroup : Error {
    using Error::Error;
};

// Configuration / usage problems; the CLI maps these to exit code 2,
// everything else above to exit code 3.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace uq
