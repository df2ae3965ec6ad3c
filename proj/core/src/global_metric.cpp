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

#include "critsense/global_metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "critsense/errors.hpp"
#include "critsense/free_fermion.hpp"
#include "critsense/parallel.hpp"
#include "critsense/quadrature.hpp"

namespace critsense::global_metric {

void SensingRegion::validate() const {
    if (dim != 1 && dim != 2)
        throw InvalidArgumentError("SensingRegion: dim must be 1 or 2");
    if (!std::isfinite(center_x) || !std::isfinite(center_z))
        throw InvalidArgumentError("SensingRegion: centers must be finite");
    if (!(width_x >= 0.0) || !(width_z >= 0.0) || !std::isfinite(width_x) ||
        !std::isfinite(width_z))
        throw InvalidArgumentError("SensingRegion: widths must be finite and >= 0");
}

void WeightMatrix::validate(int dim) const {
    if (dim < 1 || dim > 2) throw InvalidArgumentError("WeightMatrix: dim must be 1 or 2");
    const auto& w = entries;
    if (!(w(0, 0) > 0.0)) throw InvalidArgumentError("WeightMatrix: not positive definite");
    if (dim == 2) {
        if (std::abs(w(0, 1) - w(1, 0)) > 1e-12 * (std::abs(w(0, 1)) + std::abs(w(1, 0)) + 1.0))
            throw InvalidArgumentError("WeightMatrix: not symmetric");
        if (!(w(0, 0) * w(1, 1) - w(0, 1) * w(1, 0) > 0.0))
            throw InvalidArgumentError("WeightMatrix: not positive definite");
    }
}

double scalar_bound_trace(const fisher::FisherMatrix& fisher_matrix, const WeightMatrix& weight,
                          double* condition_out) {
    const int d = fisher_matrix.dim();
    weight.validate(d);
    const auto& f = fisher_matrix.entries;

    if (d == 1) {
        const double value = f(0, 0);
        if (!(value > 1.0 / kConditionCap))
            throw SingularMatrixError("scalar_bound_trace: non-positive 1x1 Fisher information",
                                      std::numeric_limits<double>::infinity());
        if (condition_out != nullptr) *condition_out = 1.0;
        return weight.entries(0, 0) / value;
    }

    const double a = f(0, 0);
    const double b = 0.5 * (f(0, 1) + f(1, 0));
    const double c = f(1, 1);
    const double half_trace = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    const double lambda_min = half_trace - radius;
    const double lambda_max = half_trace + radius;
    if (!(lambda_min > 0.0))
        throw SingularMatrixError("scalar_bound_trace: Fisher matrix not positive definite",
                                  std::numeric_limits<double>::infinity());
    const double condition = lambda_max / lambda_min;
    if (condition_out != nullptr) *condition_out = condition;
    if (condition > kConditionCap)
        throw SingularMatrixError("scalar_bound_trace: Fisher matrix condition " +
                                      std::to_string(condition) + " exceeds the cap",
                                  condition);

    const double det = a * c - b * b;
    const auto& w = weight.entries;
    return (c * w(0, 0) - b * (w(0, 1) + w(1, 0)) + a * w(1, 1)) / det;
}

namespace {

// Nodes and probability weights along one region axis. A zero width is a
// point mass at the center; otherwise Gauss-Legendre scaled by the uniform
// prior density 1/width, so weights always sum to 1.
struct AxisRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

AxisRule axis_rule(double center, double width, int n) {
    AxisRule rule;
    if (width == 0.0) {
        rule.nodes.push_back(center);
        rule.weights.push_back(1.0);
        return rule;
    }
    QuadratureRule gl = gauss_legendre(n, center - 0.5 * width, center + 0.5 * width);
    rule.nodes = std::move(gl.nodes);
    rule.weights = std::move(gl.weights);
    for (double& w : rule.weights) w /= width;
    return rule;
}

// The integrand contract: value of the uncertainty density at h, plus the
// condition number of the Fisher matrix inverted there.
using Integrand = std::function<double(const FieldPoint&, double* condition)>;

GlobalMetricResult integrate_region(const SensingRegion& region, int start_nodes,
                                    const Integrand& integrand, int threads) {
    region.validate();
    if (start_nodes < 1) throw InvalidArgumentError("g: node count must be >= 1");

    GlobalMetricResult result;
    bool have_previous = false;
    double previous = 0.0;

    for (int n = start_nodes;; n *= 2) {
        const AxisRule x_rule =
            region.dim == 2 ? axis_rule(region.center_x, region.width_x, n)
                            : AxisRule{{region.center_x}, {1.0}};
        const AxisRule z_rule = axis_rule(region.center_z, region.width_z, n);

        const std::size_t count = x_rule.nodes.size() * z_rule.nodes.size();
        std::vector<IntegrandSample> samples(count);
        parallel_for(count, threads, [&](std::size_t idx) {
            const std::size_t ix = idx / z_rule.nodes.size();
            const std::size_t iz = idx % z_rule.nodes.size();
            IntegrandSample& sample = samples[idx];
            sample.hx = x_rule.nodes[ix];
            sample.hz = z_rule.nodes[iz];
            sample.value = integrand(FieldPoint{sample.hx, sample.hz}, &sample.condition);
        });

        double estimate = 0.0;
        for (std::size_t idx = 0; idx < count; ++idx) {
            const std::size_t ix = idx / z_rule.nodes.size();
            const std::size_t iz = idx % z_rule.nodes.size();
            estimate += x_rule.weights[ix] * z_rule.weights[iz] * samples[idx].value;
        }
        result.refinement.emplace_back(static_cast<int>(count), estimate);

        const bool point_region = count == 1;
        const bool converged =
            have_previous &&
            std::abs(estimate - previous) <= kRefinementTolerance * std::max(std::abs(estimate), 1e-300);
        if (point_region || converged) {
            result.value = estimate;
            result.nodes_used = static_cast<int>(count);
            result.samples = std::move(samples);
            result.min_integrand = result.samples.front().value;
            result.max_integrand = result.samples.front().value;
            result.max_condition = 1.0;
            for (const auto& s : result.samples) {
                result.min_integrand = std::min(result.min_integrand, s.value);
                result.max_integrand = std::max(result.max_integrand, s.value);
                result.max_condition = std::max(result.max_condition, s.condition);
            }
            return result;
        }
        const double last_delta = have_previous ? std::abs(estimate - previous)
                                                : std::numeric_limits<double>::infinity();
        previous = estimate;
        have_previous = true;
        if (2 * n > kMaxNodesPerAxis)
            throw ConvergenceError(
                "g: quadrature did not settle below " + std::to_string(kRefinementTolerance) +
                    " relative by " + std::to_string(kMaxNodesPerAxis) + " nodes per axis",
                last_delta);
    }
}

// Evaluates QFI matrices for the quadrature driver. Th ED flavor anchors all
// node solves on one region-center ground state so results are independent
// of evaluation order.
class EdEngine {
  public:
    EdEngine(const ProbeConfig& config, std::vector<Axis> axes, const EngineOptions& options)
        : config_(config), axes_(std::move(axes)), options_(options) {}

    void set_anchor(const FieldPoint& center) {
        const auto op = spin_lattice::build_hamiltonian(config_, center);
        spin_lattice::SolveOptions opts;
        opts.estimate_gap = false;
        opts.threads = options_.threads;
        const auto& cache = options_.anchor_cache;
        if (cache && cache->valid &&
            cache->state.size() == static_cast<Eigen::Index>(op.dimension()))
            opts.initial_guess = &cache->state;
        else if (has_anchor_)
            opts.initial_guess = &anchor_;
        anchor_ = std::move(spin_lattice::ground_state(op, spin_lattice::SolveMethod::iterative,
                                                       opts)
                                .states[0]);
        has_anchor_ = true;
        if (cache) {
            cache->state = anchor_;
            cache->valid = true;
        }
    }

    fisher::FisherMatrix qfi(const FieldPoint& h) const {
        fisher::QfiOptions qfi_options;
        qfi_options.derivative = options_.derivative;
        qfi_options.fd_step = options_.fd_step;
        qfi_options.solver.warm_start = has_anchor_ ? &anchor_ : nullptr;
        if (qfi_options.derivative == fisher::DerivativeMethod::finite_difference &&
            config_.dimension() <= spin_lattice::kDenseDimensionCap) {
            // Difference quotients break down inside quasi-degenerate
            // doublets (ordered-phase nodes); perturbation theory still
            // resolves those, so fall back to it where the dense path exists.
            try {
                return fisher::qfi_matrix(config_, h, axes_, qfi_options);
            } catch (const DegenerateGroundStateError&) {
                qfi_options.derivative = fisher::DerivativeMethod::perturbation;
                return fisher::qfi_matrix(config_, h, axes_, qfi_options);
            }
        }
        return fisher::qfi_matrix(config_, h, axes_, qfi_options);
    }

  private:
    ProbeConfig config_;
    std::vector<Axis> axes_;
    EngineOptions options_;
    Eigen::VectorXd anchor_;
    bool has_anchor_ = false;
};

}  // namespace

GlobalMetricResult g_single(const ProbeConfig& config, const SensingRegion& region,
                            Engine engine, int nodes, const EngineOptions& options) {
    config.validate();
    region.validate();
    if (region.dim != 1) throw InvalidArgumentError("g_single: region must have dim == 1");

    Integrand integrand;
    EdEngine ed_engine(config, {Axis::z}, options);

    switch (engine) {
        case Engine::free_fermion: {
            if (config.control_x + region.center_x != 0.0)
                throw InvalidArgumentError(
                    "g_single: the free-fermion engine needs a vanishing longitudinal field");
            integrand = [&config, &options](const FieldPoint& h, double* condition) {
                const double qfi =
                    free_fermion::qfi_transverse(config.control_z + h.hz, config.coupling,
                                                 config.length, options.qfi_delta)
                        .qfi_refined;
                if (!(qfi > kQfiFloor))
                    throw DivergentIntegrandError(
                        "g_single: QFI below floor at node h_z = " + std::to_string(h.hz), h.hx,
                        h.hz);
                if (condition != nullptr) *condition = 1.0;
                return 1.0 / qfi;
            };
            break;
        }
        case Engine::ed: {
            // Anchor on the first quadrature node rather than the region
            // center: symmetric centers can sit on degenerate manifolds whose
            // states are useless warm starts.
            const AxisRule z0 = axis_rule(region.center_z, region.width_z, nodes);
            ed_engine.set_anchor(FieldPoint{region.center_x, z0.nodes.front()});
            integrand = [&ed_engine](const FieldPoint& h, double* condition) {
                const auto matrix = ed_engine.qfi(h);
                const double qfi = matrix.entries(0, 0);
                if (!(qfi > kQfiFloor))
                    throw DivergentIntegrandError(
                        "g_single: QFI below floor at node h_z = " + std::to_string(h.hz), h.hx,
                        h.hz);
                if (condition != nullptr) *condition = 1.0;
                return 1.0 / qfi;
            };
            break;
        }
        case Engine::mock: {
            integrand = [&options](const FieldPoint& h, double* condition) {
                if (!(options.mock_qfi_z > kQfiFloor))
                    throw DivergentIntegrandError("g_single: mock QFI below floor", h.hx, h.hz);
                if (condition != nullptr) *condition = 1.0;
                return 1.0 / options.mock_qfi_z;
            };
            break;
        }
    }
    return integrate_region(region, nodes, integrand, options.threads);
}

GlobalMetricResult g_multi(const ProbeConfig& config, const SensingRegion& region,
                           const WeightMatrix& weight, int nodes_per_axis, Engine engine,
                           const EngineOptions& options) {
    config.validate();
    region.validate();
    weight.validate(region.dim);
    if (engine == Engine::free_fermion)
        throw InvalidArgumentError("g_multi: the free-fermion engine is single-parameter only");

    // A dim-1 region passed through the multi path must agree with g_single,
    // so it shares the same integrand shape (1x1 trace-inverse).
    std::vector<Axis> axes;
    if (region.dim == 2) axes = {Axis::x, Axis::z};
    else axes = {Axis::z};

    Integrand integrand;
    EdEngine ed_engine(config, axes, options);

    if (engine == Engine::mock) {
        integrand = [&options, &weight, &axes](const FieldPoint& h, double* condition) {
            fisher::FisherMatrix mock;
            mock.kind = fisher::FisherKind::quantum;
            const auto d = static_cast<Eigen::Index>(axes.size());
            mock.entries = Eigen::MatrixXd::Zero(d, d);
            if (d == 2) {
                mock.entries(0, 0) = options.mock_qfi_x;
                mock.entries(1, 1) = options.mock_qfi_z;
            } else {
                mock.entries(0, 0) = options.mock_qfi_z;
            }
            try {
                return scalar_bound_trace(mock, weight, condition);
            } catch (const SingularMatrixError& e) {
                throw DivergentIntegrandError(std::string("g_multi: ") + e.what(), h.hx, h.hz);
            }
        };
    } else {
        const AxisRule x0 = region.dim == 2
                                ? axis_rule(region.center_x, region.width_x, nodes_per_axis)
                                : AxisRule{{region.center_x}, {1.0}};
        const AxisRule z0 = axis_rule(region.center_z, region.width_z, nodes_per_axis);
        ed_engine.set_anchor(FieldPoint{x0.nodes.front(), z0.nodes.front()});
        integrand = [&ed_engine, &weight](const FieldPoint& h, double* condition) {
            const auto matrix = ed_engine.qfi(h);
            try {
                return scalar_bound_trace(matrix, weight, condition);
            } catch (const SingularMatrixError& e) {
                throw DivergentIntegrandError(
                    std::string("g_multi: near-singular Fisher matrix at node (h_x, h_z) = (") +
                        std::to_string(h.hx) + ", " + std::to_string(h.hz) + "): " + e.what(),
                    h.hx, h.hz);
            }
        };
    }
    return integrate_region(region, nodes_per_axis, integrand, options.threads);
}

}  // namespace critsense::global_metric
