//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_ERRORS_HPP_
#define MOLSHIFT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace molshift {

// Bad input data: malformed files, invalid molecules, inconsistent records.
class DataError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or other numerical breakdown during computation.
class NumericError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not fit the requested operation.
class ShapeError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace molshift

#endif  // MOLSHIFT_ERRORS_HPP_
