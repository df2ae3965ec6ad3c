// Copyright 2026 The critsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CRITSENSE_ERRORS_HPP_
#define CRITSENSE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace critsense {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user-supplied parameters (bad chain length, non-finite field, ...).
class InvalidArgumentError : public Error {
  public:
    explicit InvalidArgumentError(const std::string& msg) : Error(msg) {}
};

/// An iterative solver ran out of budget. Carries the residual it got stuck at.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

/// The ground state is (near-)degenerate and the requested quantity is
/// ill-defined for it.
class DegenerateGroundStateError : public Error {
  public:
    DegenerateGroundStateError(const std::string& msg, double gap)
        : Error(msg), gap_(gap) {}
    double gap() const { return gap_; }

  private:
    double gap_;
};

/// A Fisher matrix could not be inverted within the condition-number bound.
class SingularMatrixError : public Error {
  public:
    SingularMatrixError(const std::string& msg, double condition)
        : Error(msg), condition_(condition) {}
    double condition() const { return condition_; }

  private:
    double condition_;
};

/// The uncertainty integrand blew up at a quadrature node (QFI below floor).
class DivergentIntegrandError : public Error {
  public:
    DivergentIntegrandError(const std::string& msg, double hx, double hz)
        : Error(msg), node_hx_(hx), node_hz_(hz) {}
    double node_hx() const { return node_hx_; }
    double node_hz() const { return node_hz_; }

  private:
    double node_hx_;
    double node_hz_;
};

/// Bad run configuration (CLI / config file). Maps to exit code 2.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace critsense

#endif  // CRITSENSE_ERRORS_HPP_
