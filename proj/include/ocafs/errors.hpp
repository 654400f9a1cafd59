#pragma once

#include <stdexcept>
#include <string>

namespace ocafs {

// Malformed input data: bad CSV, bad block spec, impossible split.
// The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a convergence bound or acceptance check fails (exit code 3).
class BoundViolation : public std::runtime_error {
public:
    explicit BoundViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ocafs
