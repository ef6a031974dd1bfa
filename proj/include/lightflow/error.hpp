// Copyright 2026 The lightflow Authors.
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

namespace lightflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A point lies at or behind a device's principal plane.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// A projector coordinate falls outside the projected pattern.
class OffPatternError : public Error {
 public:
  using Error::Error;
};

/// A log flow ratio lies outside the tabulated range of a LUT node.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A LUT grid node needed for a query is not usable.
class InvalidNodeError : public Error {
 public:
  using Error::Error;
};

/// Building a LUT produced no usable node.
class BuildError : public Error {
 public:
  using Error::Error;
};

/// Plane fitting on a rank-deficient point set.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Two depth maps share no valid pixel.
class EmptyComparisonError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or decoded.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lightflow
