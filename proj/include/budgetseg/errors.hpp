#pragma once

#include <stdexcept>
#include <string>

namespace budgetseg {

// Tensor/filterbank dimension mismatches and impossible output sizes.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid model structure: broken channel chains, bad strides, grid violations.
class StructureError : public std::runtime_error {
public:
    explicit StructureError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input files (JSON/CSV) or schema violations.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures (e.g. Gram factorization that does not recover under jitter).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace budgetseg
