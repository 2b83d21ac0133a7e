/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace pedavar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string & what) : std::runtime_error(what) {}
};

/// Raised when a time step exceeds the stability bound of the explicit scheme.
class CflError : public Error {
 public:
  CflError(const std::string & what, double allowed_dt)
    : Error(what), allowed_dt_(allowed_dt) {}
  double allowed_dt() const {return allowed_dt_;}

 private:
  double allowed_dt_;
};

/// Raised when a trajectory produces non-finite values.
class NanError : public Error {
 public:
  using Error::Error;
};

}  // namespace pedavar
