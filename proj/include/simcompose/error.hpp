#pragma once

#include <stdexcept>
#include <string>

namespace simcompose {

// Base class for all library errors. The CLI maps the subclasses onto exit
// codes: ValidationError -> 1, ParseError -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace simcompose
