#pragma once

#include <stdexcept>
#include <string>

namespace banach {

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: mismatched grids, wrong slot counts, degenerate frames.
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

// A numeric precondition failed (Gram not positive definite, vanishing
// evaluation functional, ...).
class NumericError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace banach
