#pragma once

#include <stdexcept>
#include <string>

namespace lrcp {

// Config / data / numerical failures map to distinct CLI exit codes.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Cholesky breakdown; carries the failing pivot index.
class CholeskyError : public NumericalError {
public:
    CholeskyError(const std::string& msg, int pivot)
        : NumericalError(msg), pivot_index(pivot) {}
    int pivot_index;
};

}  // namespace lrcp
