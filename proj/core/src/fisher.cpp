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

#include "critsense/fisher.hpp"

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <limits>

#include "critsense/errors.hpp"

namespace critsense::fisher {

namespace {

void check_normalized(const QuantumState& phi) {
    if (phi.amplitudes.size() != static_cast<Eigen::Index>(std::size_t{1} << phi.length))
        throw InvalidArgumentError("QuantumState: amplitude count does not match length");
    if (std::abs(phi.norm() - 1.0) > 1e-8)
        throw InvalidArgumentError("QuantumState: amplitudes are not normalized");
}

// (dH/dh_mu) phi with dH/dh_x = -sum_i sx_i and dH/dh_z = -sum_i sz_i.
Eigen::VectorXd field_derivative_apply(int length, Axis direction, const Eigen::VectorXd& phi) {
    const std::size_t dim = std::size_t{1} << length;
    Eigen::VectorXd w(static_cast<Eigen::Index>(dim));
    if (direction == Axis::z) {
        for (std::size_t s = 0; s < dim; ++s) {
            const int up_minus_down = length - 2 * std::popcount(static_cast<std::uint32_t>(s));
            w[static_cast<Eigen::Index>(s)] =
                -static_cast<double>(up_minus_down) * phi[static_cast<Eigen::Index>(s)];
        }
    } else {
        for (std::size_t s = 0; s < dim; ++s) {
            double acc = 0.0;
            for (int i = 0; i < length; ++i)
                acc += phi[static_cast<Eigen::Index>(s ^ (std::size_t{1} << i))];
            w[static_cast<Eigen::Index>(s)] = -acc;
        }
    }
    return w;
}

FieldPoint shifted(const FieldPoint& h, Axis direction, double amount) {
    FieldPoint out = h;
    (direction == Axis::x ? out.hx : out.hz) += amount;
    return out;
}

spin_lattice::EigenSolution solve_ground(const ProbeConfig& config, const FieldPoint& h,
                                         const SolverSettings& settings, bool want_gap,
                                         const Eigen::VectorXd* warm, double tol_factor,
                                         double* norm_bound = nullptr) {
    const auto op = spin_lattice::build_hamiltonian(config, h);
    if (norm_bound != nullptr) *norm_bound = op.norm_bound();
    spin_lattice::SolveOptions opts;
    opts.threads = settings.threads;
    opts.initial_guess = warm;
    opts.estimate_gap = want_gap;
    opts.tol_factor = tol_factor;
    return spin_lattice::ground_state(op, settings.method, opts);
}

void require_gap(double gap, double norm_bound) {
    if (!(gap > kGapFloorFactor * norm_bound))
        throw DegenerateGroundStateError(
            "fisher: ground state gap " + std::to_string(gap) +
                " is below the floor; the pure-state Fisher formulas are ill-defined",
            gap);
}

}  // namespace

QuantumState ground_state_checked(const ProbeConfig& config, const FieldPoint& h,
                                  const SolverSettings& settings) {
    double norm_bound = 0.0;
    auto sol = solve_ground(config, h, settings, /*want_gap=*/true, settings.warm_start,
                            spin_lattice::SolveOptions{}.tol_factor, &norm_bound);
    require_gap(sol.gap, norm_bound);
    return QuantumState{config.length, std::move(sol.states[0])};
}

Eigen::VectorXd state_derivative_pt(const ProbeConfig& config, const FieldPoint& h,
                                    Axis direction) {
    config.validate();
    h.validate();
    const auto op = spin_lattice::build_hamiltonian(config, h);
    if (op.dimension() > spin_lattice::kDenseDimensionCap)
        throw InvalidArgumentError("state_derivative_pt: dense path requires dimension <= 4096");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
    const auto& energies = es.eigenvalues();
    const double gap = energies[1] - energies[0];
    if (!(gap > kGapFloorFactor * op.norm_bound()))
        throw DegenerateGroundStateError(
            "state_derivative_pt: (near-)degenerate ground state, gap " + std::to_string(gap),
            gap);

    Eigen::VectorXd ground = es.eigenvectors().col(0);
    // Same sign gauge as the eigensolver wrappers, so the derivative is
    // comparable with the finite-difference route.
    Eigen::Index imax = 0;
    ground.cwiseAbs().maxCoeff(&imax);
    if (ground[imax] < 0.0) ground = -ground;

    const Eigen::VectorXd w = field_derivative_apply(config.length, direction, ground);
    Eigen::VectorXd coeffs = es.eigenvectors().transpose() * w;
    coeffs[0] = 0.0;
    for (Eigen::Index n = 1; n < coeffs.size(); ++n) coeffs[n] /= (energies[0] - energies[n]);
    return es.eigenvectors() * coeffs;
}

Eigen::VectorXd state_derivative_fd(const ProbeConfig& config, const FieldPoint& h,
                                    Axis direction, double step,
                                    const SolverSettings& settings) {
    config.validate();
    h.validate();
    if (!(step > 0.0) || !std::isfinite(step))
        throw InvalidArgumentError("state_derivative_fd: step must be finite and > 0");

    // Gauge anchor: the supplied center state, or a fresh gap-checked solve.
    QuantumState center;
    const Eigen::VectorXd* anchor = settings.center_state;
    if (anchor == nullptr) {
        center = ground_state_checked(config, h, settings);
        anchor = &center.amplitudes;
    }

    auto shifted_state = [&](double amount) {
        auto sol = solve_ground(config, shifted(h, direction, amount), settings,
                                /*want_gap=*/false, anchor, settings.shift_tol_factor);
        Eigen::VectorXd state = std::move(sol.states[0]);
        if (anchor->dot(state) < 0.0) state = -state;
        return state;
    };

    const Eigen::VectorXd plus = shifted_state(step);
    const Eigen::VectorXd minus = shifted_state(-step);
    // A level crossing inside [-step, step] swaps the tracked state; the two
    // shifted states then barely overlap and the quotient is meaningless.
    if (plus.dot(minus) < 0.5)
        throw DegenerateGroundStateError(
            "state_derivative_fd: ground state rotates wildly within the step "
            "(level crossing?); refusing the difference quotient",
            0.0);
    return (plus - minus) / (2.0 * step);
}

FisherMatrix qfi_matrix_pure(const QuantumState& phi,
                             const std::vector<Eigen::VectorXd>& derivatives) {
    check_normalized(phi);
    const auto d = static_cast<Eigen::Index>(derivatives.size());
    if (d < 1 || d > 2)
        throw InvalidArgumentError("qfi_matrix_pure: need 1 or 2 derivative vectors");
    for (const auto& dphi : derivatives)
        if (dphi.size() != phi.amplitudes.size())
            throw InvalidArgumentError("qfi_matrix_pure: derivative dimension mismatch");

    Eigen::VectorXd overlaps(d);
    for (Eigen::Index mu = 0; mu < d; ++mu)
        overlaps[mu] = derivatives[static_cast<std::size_t>(mu)].dot(phi.amplitudes);

    FisherMatrix out;
    out.kind = FisherKind::quantum;
    out.entries.resize(d, d);
    for (Eigen::Index mu = 0; mu < d; ++mu) {
        for (Eigen::Index nu = mu; nu < d; ++nu) {
            const double gram = derivatives[static_cast<std::size_t>(mu)].dot(
                derivatives[static_cast<std::size_t>(nu)]);
            const double value = 4.0 * (gram - overlaps[mu] * overlaps[nu]);
            out.entries(mu, nu) = value;
            out.entries(nu, mu) = value;
        }
    }
    return out;
}

OutcomeDistribution magnetization_distribution(const QuantumState& phi) {
    check_normalized(phi);
    OutcomeDistribution out;
    out.length = phi.length;
    out.probabilities = Eigen::VectorXd::Zero(phi.length + 1);
    const std::size_t dim = std::size_t{1} << phi.length;
    for (std::size_t s = 0; s < dim; ++s) {
        const int index = phi.length - std::popcount(static_cast<std::uint32_t>(s));
        const double a = phi.amplitudes[static_cast<Eigen::Index>(s)];
        out.probabilities[index] += a * a;
    }
    return out;
}

FisherMatrix cfi_matrix(const ProbeConfig& config, const FieldPoint& h,
                        const std::vector<Axis>& axes, double step,
                        const SolverSettings& settings) {
    config.validate();
    h.validate();
    if (axes.empty() || axes.size() > 2)
        throw InvalidArgumentError("cfi_matrix: need 1 or 2 axes");
    if (!(step > 0.0) || !std::isfinite(step))
        throw InvalidArgumentError("cfi_matrix: step must be finite and > 0");

    QuantumState center;
    if (settings.center_state != nullptr) {
        center = QuantumState{config.length, *settings.center_state};
    } else {
        center = ground_state_checked(config, h, settings);
    }
    const Eigen::VectorXd p_center = magnetization_distribution(center).probabilities;

    const auto d = static_cast<Eigen::Index>(axes.size());
    std::vector<Eigen::VectorXd> dp;
    dp.reserve(axes.size());
    for (Axis axis : axes) {
        auto probabilities_at = [&](double amount) {
            auto sol = solve_ground(config, shifted(h, axis, amount), settings,
                                    /*want_gap=*/false, &center.amplitudes,
                                    settings.shift_tol_factor);
            return magnetization_distribution(QuantumState{config.length, sol.states[0]})
                .probabilities;
        };
        const Eigen::VectorXd plus = probabilities_at(step);
        const Eigen::VectorXd minus = probabilities_at(-step);
        dp.push_back((plus - minus) / (2.0 * step));
    }

    FisherMatrix out;
    out.kind = FisherKind::classical;
    out.entries = Eigen::MatrixXd::Zero(d, d);
    int included = 0;
    for (Eigen::Index k = 0; k < p_center.size(); ++k) {
        if (p_center[k] < kProbabilityFloor) {
            out.excluded_mass += p_center[k];
            continue;
        }
        ++included;
        for (Eigen::Index mu = 0; mu < d; ++mu)
            for (Eigen::Index nu = 0; nu < d; ++nu)
                out.entries(mu, nu) +=
                    dp[static_cast<std::size_t>(mu)][k] * dp[static_cast<std::size_t>(nu)][k] /
                    p_center[k];
    }
    if (included == 0)
        throw Error("cfi_matrix: every outcome fell below the probability floor");
    return out;
}

QfiEvaluation qfi_evaluation(const ProbeConfig& config, const FieldPoint& h,
                             const std::vector<Axis>& axes, const QfiOptions& options) {
    config.validate();
    h.validate();
    if (axes.empty() || axes.size() > 2)
        throw InvalidArgumentError("qfi_evaluation: need 1 or 2 axes");

    const std::size_t dim = config.dimension();
    DerivativeMethod method = options.derivative;
    if (method == DerivativeMethod::automatic) {
        method = dim <= spin_lattice::kDenseDimensionCap ? DerivativeMethod::perturbation
                                                         : DerivativeMethod::finite_difference;
    }

    QfiEvaluation out;
    if (method == DerivativeMethod::perturbation) {
        if (dim > spin_lattice::kDenseDimensionCap)
            throw InvalidArgumentError("qfi_evaluation: perturbation path needs dimension <= 4096");
        const auto op = spin_lattice::build_hamiltonian(config, h);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
        const auto& energies = es.eigenvalues();
        out.gap = energies[1] - energies[0];
        if (!(out.gap > kGapFloorFactor * op.norm_bound()))
            throw DegenerateGroundStateError(
                "qfi_evaluation: (near-)degenerate ground state, gap " + std::to_string(out.gap),
                out.gap);
        Eigen::VectorXd ground = es.eigenvectors().col(0);
        // Same sign gauge as the eigensolver wrappers.
        Eigen::Index imax = 0;
        ground.cwiseAbs().maxCoeff(&imax);
        if (ground[imax] < 0.0) ground = -ground;

        std::vector<Eigen::VectorXd> derivatives;
        derivatives.reserve(axes.size());
        for (Axis axis : axes) {
            const Eigen::VectorXd w = field_derivative_apply(config.length, axis, ground);
            Eigen::VectorXd coeffs = es.eigenvectors().transpose() * w;
            coeffs[0] = 0.0;
            for (Eigen::Index n = 1; n < coeffs.size(); ++n)
                coeffs[n] /= (energies[0] - energies[n]);
            derivatives.push_back(es.eigenvectors() * coeffs);
        }
        out.ground = QuantumState{config.length, std::move(ground)};
        out.matrix = qfi_matrix_pure(out.ground, derivatives);
        return out;
    }

    SolverSettings solver = options.solver;
    QuantumState center;
    if (solver.center_state == nullptr) {
        double norm_bound = 0.0;
        auto sol = solve_ground(config, h, solver, /*want_gap=*/true, solver.warm_start,
                                spin_lattice::SolveOptions{}.tol_factor, &norm_bound);
        require_gap(sol.gap, norm_bound);
        out.gap = sol.gap;
        center = QuantumState{config.length, std::move(sol.states[0])};
    } else {
        center = QuantumState{config.length, *solver.center_state};
        out.gap = std::numeric_limits<double>::quiet_NaN();
    }
    solver.center_state = &center.amplitudes;

    std::vector<Eigen::VectorXd> derivatives;
    derivatives.reserve(axes.size());
    for (Axis axis : axes)
        derivatives.push_back(state_derivative_fd(config, h, axis, options.fd_step, solver));
    out.matrix = qfi_matrix_pure(center, derivatives);
    out.ground = std::move(center);
    return out;
}

FisherMatrix qfi_matrix(const ProbeConfig& config, const FieldPoint& h,
                        const std::vector<Axis>& axes, const QfiOptions& options) {
    return qfi_evaluation(config, h, axes, options).matrix;
}

}  // namespace critsense::fisher
