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

#ifndef CRITSENSE_FISHER_HPP_
#define CRITSENSE_FISHER_HPP_

#include <Eigen/Dense>
#include <vector>

#include "critsense/spin_lattice.hpp"
#include "critsense/types.hpp"

namespace critsense::fisher {

/// Outcomes with ground-state probability below this floor are excluded from
/// the classical Fisher sum; their total mass is reported instead.
inline constexpr double kProbabilityFloor = 1e-12;

/// Fisher routines refuse states whose gap is below this fraction of the
/// Hamiltonian norm bound (the pure-state formulas are ill-defined there).
inline constexpr double kGapFloorFactor = 1e-8;

/// A normalized real ground-state vector over the 2^length computational
/// basis, sign-gauged so the largest-magnitude amplitude is positive.
struct QuantumState {
    int length = 0;
    Eigen::VectorXd amplitudes;

    double norm() const { return amplitudes.norm(); }
};

enum class FisherKind { quantum, classical };

/// Symmetric positive-semidefinite d x d information matrix, d in {1, 2}.
struct FisherMatrix {
    FisherKind kind = FisherKind::quantum;
    Eigen::MatrixXd entries;
    /// Classical only: outcome probability mass dropped below the floor.
    double excluded_mass = 0.0;

    int dim() const { return static_cast<int>(entries.rows()); }
};

/// Distribution of the total-magnetization measurement: probabilities[i] is
/// the weight of outcome m = 2 i - length, i = 0..length.
struct OutcomeDistribution {
    int length = 0;
    Eigen::VectorXd probabilities;

    double outcome_value(int index) const { return 2.0 * index - length; }
};

/// How internal ground-state solves are performed.
struct SolverSettings {
    spin_lattice::SolveMethod method = spin_lattice::SolveMethod::iterative;
    int threads = 1;
    /// Residual tolerance factor for shifted solves feeding differences.
    /// Tight by default: difference quotients amplify eigenvector error by
    /// 1/(2 step).
    double shift_tol_factor = 1e-12;
    /// Optional precomputed center state (gauge anchor and warm start). The
    /// caller vouches that its gap clears the floor.
    const Eigen::VectorXd* center_state = nullptr;
    /// Warm start for the center solve itself when center_state is absent.
    const Eigen::VectorXd* warm_start = nullptr;
};

/// Ground state of `config` at field `h`, gap-checked against the floor.
/// Throws DegenerateGroundStateError when the gap is too small.
QuantumState ground_state_checked(const ProbeConfig& config, const FieldPoint& h,
                                  const SolverSettings& settings = {});

/// d|Phi>/dh_mu by summing over the full spectrum (dense path, dimension
/// <= 4096). Output is orthogonal to the ground state by construction.
Eigen::VectorXd state_derivative_pt(const ProbeConfig& config, const FieldPoint& h,
                                    Axis direction);

/// d|Phi>/dh_mu by gauge-aligned central differences at h +- step. Works at
/// iterative-solver sizes.
Eigen::VectorXd state_derivative_fd(const ProbeConfig& config, const FieldPoint& h,
                                    Axis direction, double step,
                                    const SolverSettings& settings = {});

/// Pure-state quantum Fisher matrix from a ground state and its parameter
/// derivatives: 4 Re[<d_mu Phi|d_nu Phi> - <d_mu Phi|Phi><Phi|d_nu Phi>].
FisherMatrix qfi_matrix_pure(const QuantumState& phi,
                             const std::vector<Eigen::VectorXd>& derivatives);

/// Probabilities of the L+1 total-sz outcomes.
OutcomeDistribution magnetization_distribution(const QuantumState& phi);

/// Classical Fisher matrix of the magnetization measurement, with
/// central-difference probability derivatives at h +- step per axis.
FisherMatrix cfi_matrix(const ProbeConfig& config, const FieldPoint& h,
                        const std::vector<Axis>& axes, double step,
                        const SolverSettings& settings = {});

enum class DerivativeMethod { automatic, perturbation, finite_difference };

struct QfiOptions {
    DerivativeMethod derivative = DerivativeMethod::automatic;
    double fd_step = 1e-4;
    SolverSettings solver;
};

/// Ground state, gap, and QFI matrix for the axes being estimated.
struct QfiEvaluation {
    QuantumState ground;
    double gap = 0.0;
    FisherMatrix matrix;
};

/// Assembles derivatives (perturbation theory on the dense path, central
/// differences otherwise) and evaluates the pure-state QFI matrix.
QfiEvaluation qfi_evaluation(const ProbeConfig& config, const FieldPoint& h,
                             const std::vector<Axis>& axes, const QfiOptions& options = {});

FisherMatrix qfi_matrix(const ProbeConfig& config, const FieldPoint& h,
                        const std::vector<Axis>& axes, const QfiOptions& options = {});

}  // namespace critsense::fisher

#endif  // CRITSENSE_FISHER_HPP_
