#pragma once

#include <stdexcept>
#include <string>

namespace subdiff {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// ConfigError -> 2, NumericalError/ResourceError -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameter for a mathematical object (alpha out of range, w <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A caller broke a documented contract (mismatched grids, non-uniform spacing,
// negative sigma, NaN state).
class ContractError : public Error {
public:
    using Error::Error;
};

// An iterative numeric procedure failed to converge or went unstable.
class NumericalError : public Error {
public:
    using Error::Error;
};

// The requested computation would exceed a configured resource cap.
class ResourceError : public Error {
public:
    using Error::Error;
};

// A query outside the range covered by sampled data (e.g. past a path horizon).
class RangeError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace subdiff
