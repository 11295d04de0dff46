/*
 * Copyright 2026 The netanomaly Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NETANOMALY_ERROR_HPP_
#define NETANOMALY_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace netanomaly {

// Base class of every error thrown by the library. The kind() tag is stable
// and is what the CLI prints in front of the message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Operand shapes do not chain (matmul, layer widths, attention inputs).
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

// Caller supplied data that violates an operation's preconditions.
class InputError : public Error {
 public:
  explicit InputError(const std::string& message) : Error("input", message) {}
};

// Malformed file contents; carries the 1-based line number when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t line = 0)
      : Error("format", line == 0 ? message
                                  : "line " + std::to_string(line) + ": " +
                                        message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Argument outside the domain of a mathematical function.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error("domain", message) {}
};

// Inconsistent configuration (head count not dividing d_model, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("config", message) {}
};

// A metric that is undefined for the given labels (AUC on one class).
class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& message)
      : Error("undefined-metric", message) {}
};

// Threshold calibration could not pick a cutoff.
class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& message)
      : Error("calibration", message) {}
};

// Wraps an error raised inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "[" + stage + "] " + cause.what()),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace netanomaly

#endif  // NETANOMALY_ERROR_HPP_
