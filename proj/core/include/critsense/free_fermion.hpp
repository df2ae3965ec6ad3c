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

#ifndef CRITSENSE_FREE_FERMION_HPP_
#define CRITSENSE_FREE_FERMION_HPP_

#include <vector>

namespace critsense::free_fermion {

/// Conversion between the per-mode quadratic-form energy unit and the spin
/// Hamiltonian's energy unit, pinned by matching the exact-diagonalization
/// ground energy (the test suite asserts the match at L = 8).
inline constexpr double kEnergyCalibration = 2.0;

/// Positive momenta of the even-parity sector for an even chain of length L:
/// k_m = (2m - 1) pi / L, m = 1..L/2.
struct MomentumGrid {
    int length = 0;
    std::vector<double> k;
};

/// One Bogoliubov mode of the transverse-field chain.
///
/// epsilon = sqrt((h_z + J cos k)^2 + J^2 sin^2 k), in units of the
/// calibrated quadratic form (multiply by kEnergyCalibration for spin units).
/// theta = atan2(J sin k, h_z + J cos k) in [0, pi]; the two-argument form
/// keeps the half-angle pair unambiguous when h_z + J cos k < 0.
struct BogoliubovMode {
    double k = 0.0;
    double epsilon = 0.0;
    double theta = 0.0;
    /// Set when epsilon < 1e-14 J (gap closing; theta is the limiting value).
    bool near_gapless = false;
};

/// Ground-state overlap drop under a transverse-field shift, and the quantum
/// Fisher information it encodes.
struct FidelityResult {
    double fidelity = 1.0;
    /// chi = 2 (1 - F) / delta^2.
    double susceptibility = 0.0;
    /// qfi = 4 chi at the step `delta` actually used.
    double qfi = 0.0;
    /// Richardson-improved value combining the delta and delta/2 estimates.
    double qfi_refined = 0.0;
    /// The delta and delta/2 susceptibilities disagree by more than 1%.
    bool step_warning = false;
};

/// Momenta for an even L >= 2; rejects odd or smaller L.
MomentumGrid momenta(int length);

/// Single mode at momentum k in (0, pi] for transverse field h_z, J > 0.
BogoliubovMode mode(double k, double hz, double coupling);

/// Ground energy -kEnergyCalibration * sum_{k>0} epsilon_k in spin units.
double ground_energy(double hz, double coupling, int length);

/// Ground-state fidelity F = prod_{k>0} cos((theta_k(h_z) - theta_k(h_z +
/// delta)) / 2). Always in (0, 1]; exactly 1 at delta = 0.
double fidelity(double hz, double delta, double coupling, int length);

/// Fidelity susceptibility and QFI for estimating h_z at total transverse
/// field h_z. Recommended delta <= 1e-3 J.
FidelityResult qfi_transverse(double hz, double coupling, int length, double delta = 1e-4);

}  // namespace critsense::free_fermion

#endif  // CRITSENSE_FREE_FERMION_HPP_
