#pragma once

#include <stdexcept>
#include <string>

namespace adc {

// Error classes map 1:1 onto CLI exit codes / C API status codes.

// Bad arguments, unknown attributes, malformed requests. Exit code 1.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or corrupt input data: bad file headers, unparsable JSON,
// invalid geometries. Exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A stated operation precondition does not hold: grid mismatch, duplicate
// product id, illegal flag transition, insufficient valid points. Exit code 3.
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace adc
