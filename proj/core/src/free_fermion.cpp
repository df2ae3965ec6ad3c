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

#include "critsense/free_fermion.hpp"

#include <cmath>
#include <numbers>

#include "critsense/errors.hpp"

namespace critsense::free_fermion {

namespace {

void check_inputs(double hz, double coupling, int length) {
    if (!(coupling > 0.0) || !std::isfinite(coupling))
        throw InvalidArgumentError("free_fermion: coupling must be finite and > 0");
    if (!std::isfinite(hz)) throw InvalidArgumentError("free_fermion: field must be finite");
    if (length < 2 || length % 2 != 0)
        throw InvalidArgumentError("free_fermion: length must be even and >= 2");
}

}  // namespace

MomentumGrid momenta(int length) {
    if (length < 2 || length % 2 != 0)
        throw InvalidArgumentError("momenta: length must be even and >= 2");
    MomentumGrid grid;
    grid.length = length;
    grid.k.reserve(static_cast<std::size_t>(length / 2));
    for (int m = 1; m <= length / 2; ++m)
        grid.k.push_back((2.0 * m - 1.0) * std::numbers::pi / length);
    return grid;
}

BogoliubovMode mode(double k, double hz, double coupling) {
    if (!(coupling > 0.0) || !std::isfinite(coupling))
        throw InvalidArgumentError("mode: coupling must be finite and > 0");
    if (!(k > 0.0) || !(k <= std::numbers::pi))
        throw InvalidArgumentError("mode: momentum must lie in (0, pi]");
    if (!std::isfinite(hz)) throw InvalidArgumentError("mode: field must be finite");

    BogoliubovMode out;
    out.k = k;
    const double longitudinal = hz + coupling * std::cos(k);
    const double transverse = coupling * std::sin(k);
    out.epsilon = std::hypot(longitudinal, transverse);
    out.theta = std::atan2(transverse, longitudinal);
    out.near_gapless = out.epsilon < 1e-14 * coupling;
    return out;
}

double ground_energy(double hz, double coupling, int length) {
    check_inputs(hz, coupling, length);
    const MomentumGrid grid = momenta(length);
    double sum = 0.0;
    for (double k : grid.k) sum += mode(k, hz, coupling).epsilon;
    return -kEnergyCalibration * sum;
}

double fidelity(double hz, double delta, double coupling, int length) {
    check_inputs(hz, coupling, length);
    if (!std::isfinite(delta)) throw InvalidArgumentError("fidelity: delta must be finite");

    // Per-mode overlap of the two BCS ground states; theta in [0, pi] keeps
    // every factor in (0, 1], so the product never leaves (0, 1].
    const MomentumGrid grid = momenta(length);
    double product = 1.0;
    for (double k : grid.k) {
        const double t0 = mode(k, hz, coupling).theta;
        const double t1 = mode(k, hz + delta, coupling).theta;
        product *= std::cos(0.5 * (t0 - t1));
    }
    return product;
}

FidelityResult qfi_transverse(double hz, double coupling, int length, double delta) {
    check_inputs(hz, coupling, length);
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw InvalidArgumentError("qfi_transverse: delta must be finite and > 0");

    auto susceptibility_at = [&](double d) {
        const double f = fidelity(hz, d, coupling, length);
        return 2.0 * (1.0 - f) / (d * d);
    };

    FidelityResult out;
    out.fidelity = fidelity(hz, delta, coupling, length);
    out.susceptibility = 2.0 * (1.0 - out.fidelity) / (delta * delta);
    out.qfi = 4.0 * out.susceptibility;

    const double chi_half = susceptibility_at(0.5 * delta);
    // The leading finite-step error is O(delta^2); combining the two steps
    // cancels it.
    const double chi_refined = (4.0 * chi_half - out.susceptibility) / 3.0;
    out.qfi_refined = 4.0 * chi_refined;
    const double scale = std::max({std::abs(chi_half), std::abs(out.susceptibility), 1e-300});
    out.step_warning = std::abs(chi_half - out.susceptibility) > 0.01 * scale;
    return out;
}

}  // namespace critsense::free_fermion
