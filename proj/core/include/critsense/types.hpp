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

#ifndef CRITSENSE_TYPES_HPP_
#define CRITSENSE_TYPES_HPP_

#include <cmath>
#include <cstdint>

#include "critsense/errors.hpp"

namespace critsense {

/// Field direction labels for the two estimated components.
enum class Axis { x, z };

/// Static description of the probe: a periodic chain of `length` spins with
/// exchange coupling `coupling` and a tunable control field
/// (control_x, control_z). All energies share one unit (the CLI fixes J = 1).
struct ProbeConfig {
    int length = 2;
    double coupling = 1.0;
    double control_x = 0.0;
    double control_z = 0.0;

    /// Throws InvalidArgumentError on out-of-range parameters. The coupling
    /// may be zero (decoupled spins) but not negative. Chain lengths are
    /// uncapped here; the exact-diagonalization paths enforce their own
    /// 2^20 state-vector limit.
    void validate() const {
        if (length < 2)
            throw InvalidArgumentError("ProbeConfig: length must be >= 2");
        if (!(coupling >= 0.0) || !std::isfinite(coupling))
            throw InvalidArgumentError("ProbeConfig: coupling must be finite and >= 0");
        if (!std::isfinite(control_x) || !std::isfinite(control_z))
            throw InvalidArgumentError("ProbeConfig: control fields must be finite");
    }

    /// 2^length, saturating above the representable range (only the exact-
    /// diagonalization paths, which cap the length anyway, consume this).
    std::size_t dimension() const {
        if (length >= 63) return static_cast<std::size_t>(-1);
        return std::size_t{1} << length;
    }
};

/// The unknown field to estimate. Single-parameter (transverse) problems set
/// hx = 0 and estimate hz only.
struct FieldPoint {
    double hx = 0.0;
    double hz = 0.0;

    void validate() const {
        if (!std::isfinite(hx) || !std::isfinite(hz))
            throw InvalidArgumentError("FieldPoint: field components must be finite");
    }
};

}  // namespace critsense

#endif  // CRITSENSE_TYPES_HPP_
