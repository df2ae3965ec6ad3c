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
#include <random>

#include "critsense/errors.hpp"
#include "critsense/fisher.hpp"
#include "critsense/free_fermion.hpp"
#include "critsense/spin_lattice.hpp"

using critsense::Axis;
using critsense::FieldPoint;
using critsense::ProbeConfig;
namespace fisher = critsense::fisher;
namespace spin_lattice = critsense::spin_lattice;

namespace {

fisher::QuantumState ground_of(const ProbeConfig& config, const FieldPoint& h) {
    const auto op = spin_lattice::build_hamiltonian(config, h);
    auto sol = spin_lattice::ground_state(op, spin_lattice::SolveMethod::dense);
    return fisher::QuantumState{config.length, std::move(sol.states[0])};
}

void check_psd_2x2(const Eigen::MatrixXd& m) {
    const double a = m(0, 0);
    const double b = 0.5 * (m(0, 1) + m(1, 0));
    const double c = m(1, 1);
    const double half_trace = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    CHECK(half_trace - radius >= -1e-8 * (half_trace + radius));
}

}  // namespace

TEST_CASE("perturbation derivative vanishes for a field-insensitive state") {
    // Decoupled spins in a pure z field: the ground state |up...up> does not
    // move with h_z.
    const ProbeConfig config{2, 0.0, 0.0, 0.0};
    const FieldPoint h{0.0, 1.0};
    const auto derivative = fisher::state_derivative_pt(config, h, Axis::z);
    CHECK(derivative.norm() <= 1e-12);
}

TEST_CASE("perturbation derivative is orthogonal to the ground state") {
    const ProbeConfig config{8, 1.0, 0.0, 0.0};
    const FieldPoint h{0.3, 0.4};
    const auto phi = ground_of(config, h);
    for (Axis axis : {Axis::x, Axis::z}) {
        const auto derivative = fisher::state_derivative_pt(config, h, axis);
        CHECK(std::abs(derivative.dot(phi.amplitudes)) <= 1e-12 * derivative.norm());
    }
}

TEST_CASE("perturbation and finite-difference derivatives agree") {
    const ProbeConfig config{8, 1.0, 0.0, 0.0};
    const FieldPoint h{0.3, 0.4};
    for (Axis axis : {Axis::x, Axis::z}) {
        const auto pt = fisher::state_derivative_pt(config, h, axis);
        const auto fd = fisher::state_derivative_fd(config, h, axis, 1e-5);
        CHECK((pt - fd).norm() <= 1e-5 * pt.norm());
    }
}

TEST_CASE("finite-difference derivative of a frozen state is zero") {
    const ProbeConfig config{2, 0.0, 0.0, 0.0};
    const FieldPoint h{0.0, 1.0};
    const auto fd = fisher::state_derivative_fd(config, h, Axis::z, 1e-5);
    CHECK(fd.norm() <= 1e-9);
}

TEST_CASE("finite-difference step-halving self-consistency") {
    const ProbeConfig config{10, 1.0, 0.4, 0.7};
    const FieldPoint h{0.15, 0.35};
    const auto coarse = fisher::state_derivative_fd(config, h, Axis::z, 1e-4);
    const auto fine = fisher::state_derivative_fd(config, h, Axis::z, 5e-5);
    CHECK((coarse - fine).norm() <= 1e-3 * fine.norm());
}

TEST_CASE("derivatives refuse a degenerate ground state") {
    const ProbeConfig config{4, 1.0, 0.0, 0.0};
    const FieldPoint zero{};
    CHECK_THROWS_AS(fisher::state_derivative_pt(config, zero, Axis::z),
                    critsense::DegenerateGroundStateError);
    CHECK_THROWS_AS(fisher::state_derivative_fd(config, zero, Axis::z, 1e-5),
                    critsense::DegenerateGroundStateError);
}

TEST_CASE("qfi_matrix_pure basics") {
    const ProbeConfig config{6, 1.0, 0.0, 0.0};
    const FieldPoint h{0.2, 0.6};
    const auto phi = ground_of(config, h);

    SUBCASE("zero derivatives give the zero matrix") {
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(phi.amplitudes.size());
        const auto m = fisher::qfi_matrix_pure(phi, {zero, zero});
        CHECK(m.entries.norm() == 0.0);
        CHECK(m.dim() == 2);
    }

    SUBCASE("rejects unnormalized states") {
        fisher::QuantumState bad = phi;
        bad.amplitudes *= 1.5;
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(phi.amplitudes.size());
        CHECK_THROWS_AS(fisher::qfi_matrix_pure(bad, {zero}), critsense::InvalidArgumentError);
    }

    SUBCASE("gauge invariance under a global sign flip") {
        const auto dx = fisher::state_derivative_pt(config, h, Axis::x);
        const auto dz = fisher::state_derivative_pt(config, h, Axis::z);
        const auto m = fisher::qfi_matrix_pure(phi, {dx, dz});
        fisher::QuantumState flipped = phi;
        flipped.amplitudes = -flipped.amplitudes;
        const auto m_flipped = fisher::qfi_matrix_pure(flipped, {-dx, -dz});
        CHECK((m.entries - m_flipped.entries).norm() <= 1e-10 * m.entries.norm());
    }
}

TEST_CASE("single-parameter QFI matches the free-fermion result") {
    const ProbeConfig config{10, 1.0, 0.0, 0.0};
    const FieldPoint h{0.0, 0.5};
    const auto matrix = fisher::qfi_matrix(config, h, {Axis::z});
    const double analytic = critsense::free_fermion::qfi_transverse(0.5, 1.0, 10).qfi_refined;
    CHECK(matrix.entries(0, 0) == doctest::Approx(analytic).epsilon(1e-3));
}

TEST_CASE("two-parameter QFI at the operating point is PSD with finite trace-inverse") {
    const ProbeConfig config{10, 1.0, 1.39, -0.39};
    const FieldPoint h{0.5, 0.7};
    const auto matrix = fisher::qfi_matrix(config, h, {Axis::x, Axis::z});
    CHECK(matrix.dim() == 2);
    CHECK(std::abs(matrix.entries(0, 1) - matrix.entries(1, 0)) <=
          1e-10 * matrix.entries.norm());
    check_psd_2x2(matrix.entries);

    const double a = matrix.entries(0, 0);
    const double b = matrix.entries(0, 1);
    const double c = matrix.entries(1, 1);
    const double det = a * c - b * b;
    CHECK(det > 0.0);
    CHECK(std::isfinite((a + c) / det));
}

TEST_CASE("magnetization distributions") {
    SUBCASE("fully polarized state") {
        fisher::QuantumState up;
        up.length = 3;
        up.amplitudes = Eigen::VectorXd::Zero(8);
        up.amplitudes[0] = 1.0;
        const auto dist = fisher::magnetization_distribution(up);
        REQUIRE(dist.probabilities.size() == 4);
        CHECK(dist.probabilities[3] == doctest::Approx(1.0));
        CHECK(dist.probabilities.head(3).norm() == 0.0);
        CHECK(dist.outcome_value(3) == doctest::Approx(3.0));
    }

    SUBCASE("uniform superposition is binomial") {
        fisher::QuantumState uniform;
        uniform.length = 2;
        uniform.amplitudes = Eigen::VectorXd::Constant(4, 0.5);
        const auto dist = fisher::magnetization_distribution(uniform);
        CHECK(dist.probabilities[0] == doctest::Approx(0.25));  // m = -2
        CHECK(dist.probabilities[1] == doctest::Approx(0.5));   // m = 0
        CHECK(dist.probabilities[2] == doctest::Approx(0.25));  // m = +2
    }

    SUBCASE("deep paramagnet concentrates at m = L") {
        const auto phi = ground_of(ProbeConfig{6, 1.0, 0.0, 50.0}, FieldPoint{});
        const auto dist = fisher::magnetization_distribution(phi);
        CHECK(dist.probabilities[6] > 0.99);
    }

    SUBCASE("probabilities sum to one") {
        const auto phi = ground_of(ProbeConfig{8, 1.0, 0.4, 0.7}, FieldPoint{0.1, -0.2});
        const auto dist = fisher::magnetization_distribution(phi);
        CHECK(std::abs(dist.probabilities.sum() - 1.0) <= 1e-12);
        CHECK(dist.probabilities.minCoeff() >= 0.0);
    }
}

TEST_CASE("classical Fisher matrix") {
    SUBCASE("frozen distribution gives the zero matrix") {
        const ProbeConfig config{2, 0.0, 0.0, 0.0};
        const auto m = fisher::cfi_matrix(config, FieldPoint{0.0, 1.0}, {Axis::z}, 1e-4);
        CHECK(m.entries.norm() <= 1e-20);
        CHECK(m.kind == fisher::FisherKind::classical);
    }

    SUBCASE("never exceeds the quantum bound (single parameter)") {
        for (int length : {6, 8, 10}) {
            for (double hz : {0.4, 0.8, 1.2}) {
                const ProbeConfig config{length, 1.0, 0.3, 0.0};
                const FieldPoint h{0.0, hz};
                const auto quantum = fisher::qfi_matrix(config, h, {Axis::z});
                const auto classical = fisher::cfi_matrix(config, h, {Axis::z}, 1e-4);
                INFO("L = ", length, ", h_z = ", hz);
                CHECK(classical.entries(0, 0) <=
                      quantum.entries(0, 0) * (1.0 + 1e-6) + 1e-9);
            }
        }
    }

    SUBCASE("quantum-classical gap is PSD at the operating point") {
        const ProbeConfig config{8, 1.0, 1.39, -0.39};
        const FieldPoint h{0.5, 0.7};
        const auto quantum = fisher::qfi_matrix(config, h, {Axis::x, Axis::z});
        const auto classical = fisher::cfi_matrix(config, h, {Axis::x, Axis::z}, 1e-4);
        Eigen::MatrixXd difference = quantum.entries - classical.entries;
        difference.array() += 1e-6 * quantum.entries.norm() * Eigen::MatrixXd::Identity(2, 2).array();
        check_psd_2x2(difference);
    }
}

TEST_CASE("Fisher shift covariance") {
    // F(h | B) = F(h + c | B - c): the information depends on B + h only.
    // Total field (0.55, 1.2) sits safely in the gapped paramagnetic region.
    const ProbeConfig base{8, 1.0, 0.25, 0.6};
    const FieldPoint h{0.3, 0.6};
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (int trial = 0; trial < 3; ++trial) {
        const double cx = dist(rng);
        const double cz = dist(rng);
        ProbeConfig shifted = base;
        shifted.control_x -= cx;
        shifted.control_z -= cz;
        const FieldPoint h_shifted{h.hx + cx, h.hz + cz};
        const auto original = fisher::qfi_matrix(base, h, {Axis::x, Axis::z});
        const auto moved = fisher::qfi_matrix(shifted, h_shifted, {Axis::x, Axis::z});
        CHECK((original.entries - moved.entries).norm() <= 1e-8 * original.entries.norm());
    }
}
