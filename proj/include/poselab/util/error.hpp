#pragma once

#include <stdexcept>
#include <string>

namespace poselab {

// Malformed or inconsistent external data (pose files, manifests, images).
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or other numerical breakdown. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace poselab
