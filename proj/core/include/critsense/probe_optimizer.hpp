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

#ifndef CRITSENSE_PROBE_OPTIMIZER_HPP_
#define CRITSENSE_PROBE_OPTIMIZER_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "critsense/global_metric.hpp"
#include "critsense/types.hpp"

namespace critsense::probe_optimizer {

/// Inclusive scan range for one control-field axis.
struct SearchBracket {
    double min = -3.0;
    double max = 3.0;
    double step = 0.02;

    void validate() const;
};

/// Control-field search: a coarse grid scan followed by an optional
/// Nelder-Mead polish from the best grid point. Leaving `bx` empty searches
/// B_z only, keeping B_x at the base configuration's value.
struct SearchSpec {
    std::optional<SearchBracket> bx;
    SearchBracket bz;
    bool polish = true;
    /// Simplex stops when its diameter falls below this (units of J).
    double polish_tolerance = 1e-4;
    int polish_max_iterations = 200;
};

struct TraceEntry {
    double bx = 0.0;
    double bz = 0.0;
    double g = 0.0;
    bool ok = true;
    /// Grid-scan entry (false: polish phase).
    bool grid_phase = true;
};

struct OptimizationResult {
    double bx_star = 0.0;
    double bz_star = 0.0;
    double g_star = 0.0;
    /// Every evaluation, in order. g_star never exceeds any successful entry.
    std::vector<TraceEntry> trace;
    /// The optimum sits on (or within half a step of) the bracket edge.
    bool boundary_warning = false;
    int failed_evaluations = 0;
};

/// Minimizes g over the control field(s). The probe template supplies L, J
/// and any non-searched control component; `engine`/`nodes`/`options` are
/// forwarded to g_single (dim-1 regions) or g_multi. Deterministic: grid
/// points are scanned in lexicographic (B_x, B_z) order and ties within
/// 1e-10 go to the lexicographically smallest point.
OptimizationResult minimize_g(const ProbeConfig& probe_template,
                              const global_metric::SensingRegion& region,
                              const SearchSpec& search, global_metric::Engine engine, int nodes,
                              const global_metric::EngineOptions& options = {},
                              const global_metric::WeightMatrix& weight = {});

/// Least-squares fit of g(L) = amplitude * L^(-exponent) + offset with
/// offset >= 0, via an exponent scan with a closed-form inner solve and a
/// golden-section polish.
struct ScalingFit {
    double amplitude = 0.0;
    double exponent = 0.0;
    double offset = 0.0;
    /// Euclidean norm of the fit residuals.
    double residual_norm = 0.0;
    /// Set when the data cannot determine the exponent (e.g. constant g).
    bool ill_determined = false;
};

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

struct EfficiencyOptions {
    int grid_n = 11;
    double fd_step = 1e-4;
    int threads = 1;
};

struct EfficiencyNode {
    double hx = 0.0;
    double hz = 0.0;
    /// Tr[inv F_Q(h|B)] / Tr[inv F_C(h|B)], in (0, 1] up to difference noise.
    double ratio_qfi_cfi = 0.0;
    /// Tr[inv F_C(h|B=0)] / Tr[inv F_C(h|B)].
    double ratio_b0_bstar = 0.0;
    /// False when a Fisher matrix was singular at this node.
    bool ok = true;
};

struct EfficiencyMap {
    int grid_n = 0;
    /// Row-major, h_x outer / h_z inner.
    std::vector<EfficiencyNode> nodes;
    /// Extremes of ratio_qfi_cfi over valid nodes.
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    int flagged = 0;
};

/// Magnetization-measurement efficiency over an inclusive grid_n x grid_n
/// grid covering the sensing rectangle. The probe's control field is taken
/// from `config`; the comparison column re-evaluates the classical bound at
/// zero control field.
EfficiencyMap efficiency_map(const ProbeConfig& config,
                             const global_metric::SensingRegion& region,
                             const EfficiencyOptions& options = {});

}  // namespace critsense::probe_optimizer

#endif  // CRITSENSE_PROBE_OPTIMIZER_HPP_
