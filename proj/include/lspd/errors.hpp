#pragma once

#include <stdexcept>
#include <string>

namespace lspd {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Not enough observations to carry out an estimate (empty class, n < 2, ...).
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

/// Input contains NaN/Inf, malformed rows, or an otherwise unusable payload.
class InvalidDataError : public Error {
public:
  using Error::Error;
};

/// A parameter is outside its admissible range (h <= 0, M < 1, r1 >= r2, ...).
class InvalidParameterError : public Error {
public:
  using Error::Error;
};

/// Dimension mismatch between an operator and its argument.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// An optimizer or factorization failed in a way that should not happen
/// for well-posed inputs.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A feature column has too few distinct values to support the requested
/// basis; callers fall back to a linear basis.
class DegenerateFeatureError : public Error {
public:
  using Error::Error;
};

/// File-level ingestion problems (missing file, bad schema).
class IngestError : public Error {
public:
  using Error::Error;
};

}  // namespace lspd
