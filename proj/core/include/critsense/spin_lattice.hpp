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

#ifndef CRITSENSE_SPIN_LATTICE_HPP_
#define CRITSENSE_SPIN_LATTICE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "critsense/types.hpp"

namespace critsense::spin_lattice {

/// Largest dimension for which an explicit dense matrix is allowed.
inline constexpr std::size_t kDenseDimensionCap = 4096;

/// The periodic Ising chain
///
///   H = J sum_i sx_i sx_{i+1} - sum_i [(B_x+h_x) sx_i + (B_z+h_z) sz_i]
///
/// held matrix-free in the computational sz product basis (site 0 is the
/// least significant bit; bit value 0 means sz = +1). The z-field part is
/// diagonal; every other term flips a fixed bit mask, so the operator is a
/// diagonal plus a list of (mask, coefficient) XOR couplings. Real symmetric
/// by construction. Immutable after construction and safe to share between
/// threads.
class HamiltonianOperator {
  public:
    HamiltonianOperator(int length, double bond_coupling, double field_x, double field_z);

    int length() const { return length_; }
    std::size_t dimension() const { return diagonal_.size(); }

    /// Upper bound on the operator 2-norm (sum of coupling magnitudes).
    double norm_bound() const { return norm_bound_; }

    /// y = H x. `threads` splits the basis range; the result is independent
    /// of the thread count.
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y, int threads = 1) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

    /// Explicit matrix, only for dimension() <= kDenseDimensionCap.
    Eigen::MatrixXd dense() const;

    const Eigen::VectorXd& diagonal() const { return diagonal_; }
    const std::vector<std::pair<std::uint32_t, double>>& flip_terms() const {
        return flip_terms_;
    }

  private:
    int length_;
    Eigen::VectorXd diagonal_;
    std::vector<std::pair<std::uint32_t, double>> flip_terms_;
    double norm_bound_;
};

/// Builds the Eq.-style Hamiltonian for probe `config` at unknown field `h`.
/// Rejects lengths outside [2, 20] and non-finite fields.
HamiltonianOperator build_hamiltonian(const ProbeConfig& config, const FieldPoint& h);

enum class SolveMethod { dense, iterative };

struct SolveOptions {
    /// Lanczos basis cap per restart cycle.
    int max_krylov = 200;
    int max_restarts = 12;
    /// Converged when the Ritz residual drops below tol_factor * norm_bound.
    double tol_factor = 1e-10;
    /// Relative gap below which the ground doublet is flagged degenerate.
    double degeneracy_tol = 1e-10;
    int threads = 1;
    /// Optional warm start for the iterative path.
    const Eigen::VectorXd* initial_guess = nullptr;
    /// Skip the deflated E1 run (iterative path only). The caller must then
    /// ignore gap/degenerate, which are reported as NaN/false.
    bool estimate_gap = true;
};

/// Eigenpairs in ascending energy order. States are unit-normalized with the
/// sign gauge fixed so the largest-magnitude amplitude is positive.
struct EigenSolution {
    std::vector<double> energies;
    std::vector<Eigen::VectorXd> states;
    /// Gap E1 - E0 (estimate for the iterative path).
    double gap = 0.0;
    /// Set when gap < degeneracy_tol * norm_bound. Degenerate results are
    /// still returned; Fisher routines refuse them.
    bool degenerate = false;
    /// ||H psi - E psi|| of the ground pair.
    double residual = 0.0;
    int iterations = 0;
};

/// Lowest eigenpair. The dense method requires dimension <= 4096; the
/// iterative method is Lanczos with full reorthogonalization and restarts,
/// and throws ConvergenceError (with the stuck residual) on failure.
EigenSolution ground_state(const HamiltonianOperator& op, SolveMethod method,
                           const SolveOptions& options = {});

/// n lowest eigenpairs via the dense solver (dimension <= 4096 only).
EigenSolution low_spectrum(const HamiltonianOperator& op, int n);

}  // namespace critsense::spin_lattice

#endif  // CRITSENSE_SPIN_LATTICE_HPP_
