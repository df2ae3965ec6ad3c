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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "critsense/errors.hpp"
#include "critsense/free_fermion.hpp"
#include "critsense/spin_lattice.hpp"

namespace free_fermion = critsense::free_fermion;
namespace spin_lattice = critsense::spin_lattice;
using critsense::FieldPoint;
using critsense::ProbeConfig;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd ed_ground(double hz, int length) {
    const auto op =
        spin_lattice::build_hamiltonian(ProbeConfig{length, 1.0, 0.0, 0.0}, FieldPoint{0.0, hz});
    return spin_lattice::ground_state(op, spin_lattice::SolveMethod::dense).states[0];
}
}  // namespace

TEST_CASE("momentum grids") {
    const auto two = free_fermion::momenta(2);
    REQUIRE(two.k.size() == 1);
    CHECK(two.k[0] == doctest::Approx(kPi / 2).epsilon(1e-15));

    const auto four = free_fermion::momenta(4);
    REQUIRE(four.k.size() == 2);
    CHECK(four.k[0] == doctest::Approx(kPi / 4).epsilon(1e-15));
    CHECK(four.k[1] == doctest::Approx(3 * kPi / 4).epsilon(1e-15));

    const auto large = free_fermion::momenta(1000);
    REQUIRE(large.k.size() == 500);
    CHECK(large.k.front() == doctest::Approx(kPi / 1000).epsilon(1e-14));
    CHECK(large.k.back() == doctest::Approx(999 * kPi / 1000).epsilon(1e-14));
    for (std::size_t i = 1; i < large.k.size(); ++i) CHECK(large.k[i] > large.k[i - 1]);

    CHECK_THROWS_AS(free_fermion::momenta(3), critsense::InvalidArgumentError);
    CHECK_THROWS_AS(free_fermion::momenta(0), critsense::InvalidArgumentError);
}

TEST_CASE("single Bogoliubov modes") {
    const auto mid = free_fermion::mode(kPi / 2, 0.0, 1.0);
    CHECK(mid.epsilon == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mid.theta == doctest::Approx(kPi / 2).epsilon(1e-15));

    // The zone edge closes the gap at h_z = J.
    for (double hz : {0.3, 1.0, 2.5}) {
        const auto edge = free_fermion::mode(kPi, hz, 1.0);
        CHECK(edge.epsilon == doctest::Approx(std::abs(hz - 1.0)).epsilon(1e-14));
    }
    CHECK(free_fermion::mode(kPi, 1.0, 1.0).near_gapless);

    const auto generic = free_fermion::mode(kPi / 3, 0.5, 1.0);
    CHECK(generic.epsilon == doctest::Approx(std::sqrt(1.75)).epsilon(1e-15));
    CHECK(generic.theta ==
          doctest::Approx(std::atan2(std::sin(kPi / 3), 1.0)).epsilon(1e-15));

    // Half-angle pair stays normalized.
    const double s = std::sin(generic.theta / 2);
    const double c = std::cos(generic.theta / 2);
    CHECK(s * s + c * c == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(free_fermion::mode(0.0, 0.5, 1.0), critsense::InvalidArgumentError);
    CHECK_THROWS_AS(free_fermion::mode(kPi / 2, 0.5, 0.0), critsense::InvalidArgumentError);
}

TEST_CASE("theta is monotone decreasing in the field") {
    for (double k : {0.3, kPi / 2, 2.8}) {
        double previous = free_fermion::mode(k, -3.0, 1.0).theta;
        for (double hz = -2.9; hz <= 3.0; hz += 0.1) {
            const double theta = free_fermion::mode(k, hz, 1.0).theta;
            CHECK(theta < previous);
            previous = theta;
        }
    }
}

TEST_CASE("ground energy") {
    // At zero field every mode has unit energy.
    CHECK(free_fermion::ground_energy(0.0, 1.0, 4) ==
          doctest::Approx(-free_fermion::kEnergyCalibration * 2.0).epsilon(1e-15));

    // Strong-field asymptote: -(calibration) (L/2) h_z.
    const double strong = free_fermion::ground_energy(1e4, 1.0, 100);
    CHECK(strong ==
          doctest::Approx(-free_fermion::kEnergyCalibration * 50 * 1e4).epsilon(1e-3));

    // Exact-diagonalization oracle at L = 8.
    const auto op = spin_lattice::build_hamiltonian(ProbeConfig{8, 1.0, 0.0, 0.5}, FieldPoint{});
    const auto dense = spin_lattice::ground_state(op, spin_lattice::SolveMethod::dense);
    CHECK(free_fermion::ground_energy(0.5, 1.0, 8) ==
          doctest::Approx(dense.energies[0]).epsilon(1e-10));
}

TEST_CASE("fidelity identity and symmetry") {
    CHECK(free_fermion::fidelity(0.7, 0.0, 1.0, 64) == 1.0);
    for (double hz : {0.2, 1.0, 1.7}) {
        for (double delta : {1e-4, 1e-2, 0.3}) {
            const double f = free_fermion::fidelity(hz, delta, 1.0, 128);
            CHECK(f > 0.0);
            CHECK(f <= 1.0);
            const double swapped = free_fermion::fidelity(hz + delta, -delta, 1.0, 128);
            CHECK(std::abs(f - swapped) <= 1e-14);
        }
    }
}

TEST_CASE("fidelity matches exact-diagonalization overlaps") {
    const double delta = 1e-4;
    for (int length : {4, 6, 8, 10}) {
        for (double hz : {0.2, 0.5, 0.9, 1.0, 1.5}) {
            const double analytic = free_fermion::fidelity(hz, delta, 1.0, length);
            const double overlap =
                std::abs(ed_ground(hz, length).dot(ed_ground(hz + delta, length)));
            INFO("L = ", length, ", h_z = ", hz);
            CHECK(std::abs(analytic - overlap) <= 1e-8);
        }
    }
}

TEST_CASE("fidelity drops fastest at criticality") {
    const double delta = 1e-3;
    const double critical = free_fermion::fidelity(1.0, delta, 1.0, 1000);
    const double off = free_fermion::fidelity(0.5, delta, 1.0, 1000);
    CHECK(critical < off);
}

TEST_CASE("qfi_transverse basics") {
    const auto result = free_fermion::qfi_transverse(0.5, 1.0, 100);
    CHECK(result.qfi == doctest::Approx(4.0 * result.susceptibility).epsilon(1e-15));
    CHECK(result.susceptibility ==
          doctest::Approx(2.0 * (1.0 - result.fidelity) / (1e-4 * 1e-4)).epsilon(1e-12));
    CHECK_FALSE(result.step_warning);
    CHECK(result.qfi_refined == doctest::Approx(result.qfi).epsilon(1e-2));

    // Far from criticality the QFI grows linearly with L.
    const double q100 = free_fermion::qfi_transverse(3.0, 1.0, 100).qfi_refined;
    const double q200 = free_fermion::qfi_transverse(3.0, 1.0, 200).qfi_refined;
    CHECK(q200 / q100 == doctest::Approx(2.0).epsilon(1e-3));

    // At criticality it grows like L^2.
    const double c100 = free_fermion::qfi_transverse(1.0, 1.0, 100).qfi_refined;
    const double c200 = free_fermion::qfi_transverse(1.0, 1.0, 200).qfi_refined;
    CHECK(c200 / c100 == doctest::Approx(4.0).epsilon(0.02));

    CHECK_THROWS_AS(free_fermion::qfi_transverse(0.5, 1.0, 100, 0.0),
                    critsense::InvalidArgumentError);
    CHECK_THROWS_AS(free_fermion::qfi_transverse(0.5, 1.0, 7),
                    critsense::InvalidArgumentError);
}

TEST_CASE("step warning fires when the two estimates disagree") {
    // A huge step at criticality leaves the quadratic regime.
    const auto result = free_fermion::qfi_transverse(1.0, 1.0, 400, 0.05);
    CHECK(result.step_warning);
}
