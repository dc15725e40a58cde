#pragma once

#include <stdexcept>
#include <string>

namespace hartree {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields or operators live on different grids") {}
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved) : Error(what), achieved_error(achieved) {}
  double achieved_error;
};

class NumericalAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace hartree
