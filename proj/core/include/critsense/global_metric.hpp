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

#ifndef CRITSENSE_GLOBAL_METRIC_HPP_
#define CRITSENSE_GLOBAL_METRIC_HPP_

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "critsense/fisher.hpp"
#include "critsense/types.hpp"

namespace critsense::global_metric {

/// Quadrature nodes where the Fisher information falls below this floor
/// abort the integral (a blow-up of 1/F at finite L signals an upstream
/// degeneracy, not physics).
inline constexpr double kQfiFloor = 1e-12;

/// Condition-number bound for inverting Fisher matrices.
inline constexpr double kConditionCap = 1e12;

/// Adaptive refinement accepts a level when doubling the nodes moves the
/// estimate by less than this relative amount.
inline constexpr double kRefinementTolerance = 1e-3;

/// Hard cap on Gauss-Legendre nodes per axis during refinement.
inline constexpr int kMaxNodesPerAxis = 128;

/// Uniform-prior integration domain: per-parameter center and width. With
/// dim == 1 only the z axis is active (center_x pins the fixed h_x value).
/// A zero width degenerates that axis to a point evaluation.
struct SensingRegion {
    int dim = 1;
    double center_x = 0.0;
    double width_x = 0.0;
    double center_z = 0.0;
    double width_z = 0.0;

    void validate() const;
};

/// Positive-definite scalarization weight for the multi-parameter bound.
struct WeightMatrix {
    Eigen::Matrix2d entries = Eigen::Matrix2d::Identity();

    static WeightMatrix identity() { return WeightMatrix{}; }
    void validate(int dim) const;
};

enum class Engine {
    /// Analytic transverse-field path (single-parameter only).
    free_fermion,
    /// Exact diagonalization / Lanczos path.
    ed,
    /// Constant Fisher information, for plumbing tests.
    mock,
};

/// Mutable warm-start slot shared across sequential g evaluations (the
/// optimizer hands one cache down its scan so neighboring control fields
/// reuse each other's ground states).
struct AnchorCache {
    Eigen::VectorXd state;
    bool valid = false;
};

struct EngineOptions {
    /// Fidelity step for the free-fermion QFI.
    double qfi_delta = 1e-4;
    /// Central-difference step for the ED derivative path.
    double fd_step = 1e-4;
    /// Derivative route for the ED engine during g evaluation.
    fisher::DerivativeMethod derivative = fisher::DerivativeMethod::finite_difference;
    int threads = 1;
    /// Mock-engine Fisher values (diagonal).
    double mock_qfi_x = 1.0;
    double mock_qfi_z = 1.0;
    /// Optional cross-evaluation warm start for the ED engine.
    std::shared_ptr<AnchorCache> anchor_cache;
};

struct IntegrandSample {
    double hx = 0.0;
    double hz = 0.0;
    double value = 0.0;
    double condition = 1.0;
};

struct GlobalMetricResult {
    /// The average-uncertainty bound g(B).
    double value = 0.0;
    /// Total nodes at the accepted refinement level.
    int nodes_used = 0;
    /// (total nodes, estimate) per refinement level, in evaluation order.
    std::vector<std::pair<int, double>> refinement;
    /// Integrand samples of the accepted level.
    std::vector<IntegrandSample> samples;
    double min_integrand = 0.0;
    double max_integrand = 0.0;
    /// Largest Fisher-matrix condition number seen at the accepted level.
    double max_condition = 1.0;
};

/// Single-parameter average uncertainty: the uniform-prior integral of
/// 1/F_Q(h_z|B) over the sensing interval, by adaptive Gauss-Legendre
/// quadrature starting from `nodes` points.
GlobalMetricResult g_single(const ProbeConfig& config, const SensingRegion& region,
                            Engine engine, int nodes, const EngineOptions& options = {});

/// Multi-parameter average uncertainty: the uniform-prior integral of
/// Tr[inv(F_Q) W] over the sensing rectangle (tensor-product quadrature).
GlobalMetricResult g_multi(const ProbeConfig& config, const SensingRegion& region,
                           const WeightMatrix& weight, int nodes_per_axis,
                           Engine engine = Engine::ed, const EngineOptions& options = {});

/// Tr[inv(F) W] via the closed-form 2x2 inverse. Throws SingularMatrixError
/// when F is not invertible within the condition cap. `condition_out`, when
/// given, receives the condition number.
double scalar_bound_trace(const fisher::FisherMatrix& fisher_matrix, const WeightMatrix& weight,
                          double* condition_out = nullptr);

}  // namespace critsense::global_metric

#endif  // CRITSENSE_GLOBAL_METRIC_HPP_
