#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ulc {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A value-only position (pair component, injection payload) received
// something that is not a value distribution.
class ShapeError : public Error {
  public:
    using Error::Error;
};

class OpenValueError : public Error {
  public:
    using Error::Error;
};

class DecompositionError : public Error {
  public:
    using Error::Error;
};

class NotNormalError : public Error {
  public:
    using Error::Error;
};

class UnsupportedType : public Error {
  public:
    using Error::Error;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

class StuckError : public Error {
  public:
    using Error::Error;
};

class NoDerivation : public Error {
  public:
    using Error::Error;
};

// lambda_Q typing failure: linearity or judgment-form violations.
class QTypeError : public Error {
  public:
    using Error::Error;
};

class AdequacyViolation : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    ParseError(const std::string &msg, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace ulc
