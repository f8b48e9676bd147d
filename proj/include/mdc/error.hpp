// Copyright 2026 The mdc Authors
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

#ifndef MDC_ERROR_HPP_
#define MDC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mdc {

// Base for all domain errors. `kind()` is a stable machine-parseable slug,
// used by the CLI to emit `error[<kind>]: <message>` lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& m) : Error("bounds", m) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

class IncompatibilityError : public Error {
 public:
  explicit IncompatibilityError(const std::string& m)
      : Error("incompatibility", m) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error("schema", m) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error("parse", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& m) : Error("divergence", m) {}
};

class DegenerateFrameError : public Error {
 public:
  explicit DegenerateFrameError(const std::string& m)
      : Error("degenerate_frame", m) {}
};

class AliasingError : public Error {
 public:
  explicit AliasingError(const std::string& m) : Error("aliasing", m) {}
};

class IngestionError : public Error {
 public:
  explicit IngestionError(const std::string& m) : Error("ingestion", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace mdc

#endif  // MDC_ERROR_HPP_
