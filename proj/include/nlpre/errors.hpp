// Copyright 2026 The nlpre Authors
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

#ifndef NLPRE_ERRORS_HPP_
#define NLPRE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace nlpre {

// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// A bad argument that is not a shape problem (empty window, bad step, ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// The integrated state left the finite reals. `time()` is the first time at
// which a non-finite component was observed.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// A division by (near) zero in a parameter readout or in the plant model.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(std::string component, const std::string& what)
      : std::runtime_error(what), component_(std::move(component)) {}
  const std::string& component() const { return component_; }

 private:
  std::string component_;
};

class UnsupportedModeError : public std::logic_error {
 public:
  explicit UnsupportedModeError(const std::string& what) : std::logic_error(what) {}
};

// A user supplied mapping bundle returns values of the wrong shape.
class StructuralError : public std::invalid_argument {
 public:
  StructuralError(std::string mapping, const std::string& what)
      : std::invalid_argument(what), mapping_(std::move(mapping)) {}
  const std::string& mapping() const { return mapping_; }

 private:
  std::string mapping_;
};

// File or directory could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlpre

#endif  // NLPRE_ERRORS_HPP_
