#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmaflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the Monge-Ampère ratio carries an imaginary residue. This is
/// the symptom of a sign/index convention mistake or of aliasing.
class ConventionError : public Error {
public:
    using Error::Error;
};

/// The metric g_phi stopped being positive definite somewhere on the grid.
class PositivityError : public Error {
public:
    PositivityError(const std::string& what, std::size_t point, double margin, double time)
        : Error(what), point_(point), margin_(margin), time_(time) {}

    std::size_t point() const { return point_; }
    double margin() const { return margin_; }
    double time() const { return time_; }

private:
    std::size_t point_;
    double margin_;
    double time_;
};

/// Invalid run configuration; `pointer()` is a JSON pointer to the culprit.
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& what)
        : Error(pointer + ": " + what), pointer_(std::move(pointer)) {}

    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

}  // namespace qmaflow
