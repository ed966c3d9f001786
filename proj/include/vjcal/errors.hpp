#pragma once

#include <stdexcept>
#include <string>

namespace vjcal {

/// Malformed or missing input (files, fields, flags).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The measurements cannot support the requested model.
class UnusableDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solver produced a non-finite loss or a non-factorizable system.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vjcal
