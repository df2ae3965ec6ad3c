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

#include "critsense/spin_lattice.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "critsense/errors.hpp"
#include "critsense/parallel.hpp"

namespace critsense::spin_lattice {

namespace {

Eigen::VectorXd seeded_gaussian(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
    v.normalize();
    return v;
}

void fix_sign_gauge(Eigen::VectorXd& v) {
    Eigen::Index imax = 0;
    double amax = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > amax) {
            amax = a;
            imax = i;
        }
    }
    if (v[imax] < 0.0) v = -v;
}

}  // namespace

HamiltonianOperator::HamiltonianOperator(int length, double bond_coupling, double field_x,
                                         double field_z)
    : length_(length) {
    const std::size_t dim = std::size_t{1} << length;
    const auto n_sites = static_cast<std::uint32_t>(length);

    // Merge XOR masks; with L = 2 the two periodic bonds share one mask.
    std::map<std::uint32_t, double> terms;
    if (bond_coupling != 0.0) {
        for (std::uint32_t i = 0; i < n_sites; ++i) {
            const std::uint32_t mask =
                (std::uint32_t{1} << i) | (std::uint32_t{1} << ((i + 1) % n_sites));
            terms[mask] += bond_coupling;
        }
    }
    if (field_x != 0.0) {
        for (std::uint32_t i = 0; i < n_sites; ++i) terms[std::uint32_t{1} << i] += -field_x;
    }
    flip_terms_.assign(terms.begin(), terms.end());

    diagonal_.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) {
        const int up_minus_down = length - 2 * std::popcount(static_cast<std::uint32_t>(s));
        diagonal_[static_cast<Eigen::Index>(s)] = -field_z * up_minus_down;
    }

    double bound = std::abs(field_z) * length;
    for (const auto& [mask, coeff] : flip_terms_) bound += std::abs(coeff);
    norm_bound_ = bound;
}

void HamiltonianOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y, int threads) const {
    const std::size_t dim = dimension();
    if (static_cast<std::size_t>(x.size()) != dim)
        throw InvalidArgumentError("HamiltonianOperator::apply: dimension mismatch");
    y.resize(static_cast<Eigen::Index>(dim));

    const auto* terms = flip_terms_.data();
    const std::size_t n_terms = flip_terms_.size();
    const double* xs = x.data();
    const double* diag = diagonal_.data();
    double* ys = y.data();

    auto run_block = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            double acc = diag[s] * xs[s];
            for (std::size_t t = 0; t < n_terms; ++t)
                acc += terms[t].second * xs[s ^ terms[t].first];
            ys[s] = acc;
        }
    };

    if (threads <= 1 || dim < 4096) {
        run_block(0, dim);
        return;
    }
    const std::size_t n_blocks = static_cast<std::size_t>(std::min<int>(threads * 4, 64));
    const std::size_t block = (dim + n_blocks - 1) / n_blocks;
    parallel_for(n_blocks, threads, [&](std::size_t b) {
        run_block(b * block, std::min(dim, (b + 1) * block));
    });
}

Eigen::VectorXd HamiltonianOperator::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y;
    apply(x, y);
    return y;
}

Eigen::MatrixXd HamiltonianOperator::dense() const {
    const std::size_t dim = dimension();
    if (dim > kDenseDimensionCap)
        throw InvalidArgumentError("HamiltonianOperator::dense: dimension exceeds 4096");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        m(si, si) = diagonal_[si];
        for (const auto& [mask, coeff] : flip_terms_)
            m(si, static_cast<Eigen::Index>(s ^ mask)) += coeff;
    }
    return m;
}

HamiltonianOperator build_hamiltonian(const ProbeConfig& config, const FieldPoint& h) {
    config.validate();
    h.validate();
    if (config.length > 20)
        throw InvalidArgumentError(
            "build_hamiltonian: lengths above 20 exceed the 2^20 state-vector cap");
    return HamiltonianOperator(config.length, config.coupling, config.control_x + h.hx,
                               config.control_z + h.hz);
}

namespace {

struct RitzPair {
    double value = 0.0;
    double residual_bound = 0.0;
    Eigen::VectorXd tridiag_vector;
};

// Lowest two Ritz pairs of the Lanczos tridiagonal matrix.
void lowest_ritz(const std::vector<double>& alphas, const std::vector<double>& betas,
                 double beta_last, RitzPair& p0, RitzPair& p1) {
    const auto n = static_cast<Eigen::Index>(alphas.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t(i, i) = alphas[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            t(i, i + 1) = betas[static_cast<std::size_t>(i)];
            t(i + 1, i) = betas[static_cast<std::size_t>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    p0.value = es.eigenvalues()[0];
    p0.tridiag_vector = es.eigenvectors().col(0);
    p0.residual_bound = beta_last * std::abs(p0.tridiag_vector[n - 1]);
    if (n > 1) {
        p1.value = es.eigenvalues()[1];
        p1.tridiag_vector = es.eigenvectors().col(1);
        p1.residual_bound = beta_last * std::abs(p1.tridiag_vector[n - 1]);
    } else {
        p1 = p0;
        p1.residual_bound = std::numeric_limits<double>::infinity();
    }
}

struct LanczosOutcome {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

// Lanczos with full reorthogonalization and restarts for the lowest eigenpair
// of `op`, optionally restricted to the complement of `deflate`. When
// `gap_reference` is set (gap-estimation runs), the tolerance relaxes to a
// few percent of the current distance from that value: the estimate only
// feeds threshold comparisons, so chasing absolute residuals on a wide-open
// gap is wasted work.
LanczosOutcome lanczos_lowest(const HamiltonianOperator& op, const SolveOptions& options,
                              double tol, const Eigen::VectorXd* start,
                              const Eigen::VectorXd* deflate, std::uint64_t seed,
                              const double* gap_reference = nullptr) {
    const std::size_t dim = op.dimension();
    const int m = std::max(2, std::min<int>(options.max_krylov, static_cast<int>(dim)));

    auto project = [&](Eigen::VectorXd& v) {
        if (deflate != nullptr) v -= deflate->dot(v) * (*deflate);
    };

    Eigen::VectorXd v0;
    if (start != nullptr && start->size() == static_cast<Eigen::Index>(dim)) {
        // A touch of deterministic noise keeps the start vector from being
        // exactly orthogonal to the target eigenvector.
        v0 = *start + 1e-8 * start->norm() * seeded_gaussian(dim, seed);
    } else {
        v0 = seeded_gaussian(dim, seed);
    }
    project(v0);
    if (v0.norm() < 1e-12) v0 = seeded_gaussian(dim, seed + 1);
    project(v0);
    v0.normalize();

    LanczosOutcome out;
    std::vector<Eigen::VectorXd> basis;
    std::vector<double> alphas;
    std::vector<double> betas;
    Eigen::VectorXd w(static_cast<Eigen::Index>(dim));

    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        basis.clear();
        alphas.clear();
        betas.clear();
        basis.push_back(v0);

        RitzPair p0;
        RitzPair p1;
        bool have_ritz = false;
        bool invariant = false;

        for (int j = 0; j < m; ++j) {
            op.apply(basis[static_cast<std::size_t>(j)], w, options.threads);
            project(w);
            const double alpha = basis[static_cast<std::size_t>(j)].dot(w);
            w -= alpha * basis[static_cast<std::size_t>(j)];
            if (j > 0) w -= betas[static_cast<std::size_t>(j - 1)] * basis[static_cast<std::size_t>(j - 1)];

            // Full reorthogonalization, with a second pass when cancellation
            // ate most of the vector (DGKS test).
            const double pre_norm = w.norm();
            for (const auto& u : basis) w -= u.dot(w) * u;
            if (w.norm() < 0.7 * pre_norm) {
                for (const auto& u : basis) w -= u.dot(w) * u;
            }

            alphas.push_back(alpha);
            const double beta = w.norm();
            ++out.iterations;

            invariant = beta <= 1e-14 * std::max(1.0, op.norm_bound());
            const bool last = (j + 1 == m) || (static_cast<std::size_t>(j + 1) == dim);
            const bool check = invariant || last || j < 48 || ((j & 3) == 0);
            if (check) {
                lowest_ritz(alphas, betas, invariant ? 0.0 : beta, p0, p1);
                have_ritz = true;
                double target = tol;
                if (gap_reference != nullptr)
                    target = std::max(tol, 0.02 * std::abs(p0.value - *gap_reference));
                if (p0.residual_bound <= target || invariant) break;
            }
            if (last) break;
            betas.push_back(beta);
            w /= beta;
            basis.push_back(w);
        }

        if (!have_ritz) lowest_ritz(alphas, betas, 0.0, p0, p1);

        Eigen::VectorXd ritz_vec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < basis.size(); ++i)
            ritz_vec += p0.tridiag_vector[static_cast<Eigen::Index>(i)] * basis[i];
        project(ritz_vec);
        ritz_vec.normalize();

        op.apply(ritz_vec, w, options.threads);
        project(w);
        const double value = ritz_vec.dot(w);
        const double residual = (w - value * ritz_vec).norm();

        if (residual < out.residual) {
            out.value = value;
            out.vector = ritz_vec;
            out.residual = residual;
        }
        double accept = tol;
        if (gap_reference != nullptr)
            accept = std::max(tol, 0.02 * std::abs(out.value - *gap_reference));
        if (out.residual <= accept || invariant) {
            out.converged = true;
            return out;
        }
        v0 = out.vector + 1e-8 * seeded_gaussian(dim, seed + 17 * (restart + 1));
        project(v0);
        v0.normalize();
    }
    return out;
}

EigenSolution ground_state_dense(const HamiltonianOperator& op, const SolveOptions& options) {
    if (op.dimension() > kDenseDimensionCap)
        throw InvalidArgumentError("ground_state: dense method requires dimension <= 4096");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
    EigenSolution sol;
    sol.energies.push_back(es.eigenvalues()[0]);
    Eigen::VectorXd ground = es.eigenvectors().col(0);
    fix_sign_gauge(ground);
    sol.gap = es.eigenvalues()[1] - es.eigenvalues()[0];
    sol.degenerate = sol.gap < options.degeneracy_tol * op.norm_bound();
    sol.residual = (op.apply(ground) - sol.energies[0] * ground).norm();
    sol.states.push_back(std::move(ground));
    return sol;
}

}  // namespace

EigenSolution ground_state(const HamiltonianOperator& op, SolveMethod method,
                           const SolveOptions& options) {
    if (method == SolveMethod::dense) return ground_state_dense(op, options);

    const double tol = options.tol_factor * std::max(1e-300, op.norm_bound());
    const std::uint64_t seed = 0x9e3779b97f4a7c15ULL ^ op.dimension();

    LanczosOutcome ground =
        lanczos_lowest(op, options, tol, options.initial_guess, nullptr, seed);
    if (!ground.converged)
        throw ConvergenceError("ground_state: Lanczos did not converge (residual " +
                                   std::to_string(ground.residual) + ")",
                               ground.residual);

    EigenSolution sol;
    sol.iterations = ground.iterations;

    if (options.estimate_gap) {
        // Gap estimate from a deflated run in the complement of the ground
        // vector; loose tolerance, it only feeds the degeneracy flag. Inside
        // a tight doublet the first run can residual-converge onto the upper
        // partner; the deflated run then lands BELOW it, in which case the
        // roles are swapped and the estimate redone.
        SolveOptions gap_options = options;
        gap_options.max_krylov = std::min(options.max_krylov, 120);
        gap_options.max_restarts = std::min(options.max_restarts, 4);
        const double gap_tol = std::max(tol, 1e-7 * op.norm_bound());
        for (int attempt = 0; attempt < 3; ++attempt) {
            LanczosOutcome excited =
                lanczos_lowest(op, gap_options, gap_tol, nullptr, &ground.vector,
                               seed + 101 + 31 * attempt, &ground.value);
            sol.iterations += excited.iterations;
            if (excited.value < ground.value - 1e-13 * op.norm_bound() && attempt + 1 < 3) {
                LanczosOutcome better = lanczos_lowest(op, options, tol, &excited.vector,
                                                       nullptr, seed + 7919 * (attempt + 1));
                sol.iterations += better.iterations;
                if (!better.converged)
                    throw ConvergenceError(
                        "ground_state: Lanczos did not converge after doublet swap (residual " +
                            std::to_string(better.residual) + ")",
                        better.residual);
                ground = better;
                continue;
            }
            sol.gap = std::max(0.0, excited.value - ground.value);
            sol.degenerate = sol.gap < options.degeneracy_tol * op.norm_bound();
            break;
        }
    } else {
        sol.gap = std::numeric_limits<double>::quiet_NaN();
        sol.degenerate = false;
    }

    sol.residual = ground.residual;
    sol.energies.push_back(ground.value);
    fix_sign_gauge(ground.vector);
    sol.states.push_back(std::move(ground.vector));
    return sol;
}

EigenSolution low_spectrum(const HamiltonianOperator& op, int n) {
    if (n < 1 || static_cast<std::size_t>(n) > op.dimension())
        throw InvalidArgumentError("low_spectrum: need 1 <= n <= dimension");
    if (op.dimension() > kDenseDimensionCap)
        throw InvalidArgumentError("low_spectrum: dense path requires dimension <= 4096");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
    EigenSolution sol;
    sol.energies.reserve(static_cast<std::size_t>(n));
    sol.states.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        sol.energies.push_back(es.eigenvalues()[i]);
        Eigen::VectorXd v = es.eigenvectors().col(i);
        fix_sign_gauge(v);
        sol.states.push_back(std::move(v));
    }
    if (op.dimension() > 1) {
        sol.gap = es.eigenvalues()[1] - es.eigenvalues()[0];
        sol.degenerate = sol.gap < SolveOptions{}.degeneracy_tol * op.norm_bound();
    }
    sol.residual =
        (op.apply(sol.states[0]) - sol.energies[0] * sol.states[0]).norm();
    return sol;
}

}  // namespace critsense::spin_lattice
