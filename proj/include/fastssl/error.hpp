// SPDX-License-Identifier: Apache-2.0
/**
 * @file   error.hpp
 * @brief  Exception hierarchy shared by every fastssl module.
 *
 * The C API maps each class onto a status code (see fastssl.h).
 */
#pragma once

#include <stdexcept>
#include <string>

namespace fastssl {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter bundle or violated cross-field constraint.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Step or index outside the configured domain.
class RangeError : public Error {
public:
  using Error::Error;
};

class SelectionError : public Error {
public:
  using Error::Error;
};

/// Non-finite values, singular formulas, zero-norm vectors.
class NumericError : public Error {
public:
  using Error::Error;
};

class ProfileError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace fastssl
