#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace kssc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base error type. `kind()` is the machine-readable tag surfaced in CLI
/// output as `error.kind`.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error("dimension", msg) {}
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& msg) : Error("degenerate", msg) {}
};

class InvalidArgumentError : public Error {
public:
    explicit InvalidArgumentError(const std::string& msg) : Error("invalid", msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io", msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error("parse", msg) {}
};

}  // namespace kssc
