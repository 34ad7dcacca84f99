// Copyright 2026 The twistwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace twistwalk {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter (out-of-range retardance, non-half-integer charge, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during a computation. The CLI maps these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class WindowError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Amplitude reached the OAM window boundary.
class TruncationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateBandError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NotPlanarError : public NumericError {
 public:
  using NumericError::NumericError;
};

class QuadratureError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ZeroCountError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ZeroEfficiencyError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class AmplitudeRangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyDistributionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace twistwalk
