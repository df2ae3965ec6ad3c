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

#include "critsense/probe_optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "critsense/errors.hpp"
#include "critsense/parallel.hpp"

namespace critsense::probe_optimizer {

void SearchBracket::validate() const {
    if (!std::isfinite(min) || !std::isfinite(max) || min > max)
        throw InvalidArgumentError("SearchBracket: need finite min <= max");
    if (!(step > 0.0) || !std::isfinite(step))
        throw InvalidArgumentError("SearchBracket: need step > 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieWindow = 1e-10;

std::vector<double> bracket_points(const SearchBracket& bracket) {
    std::vector<double> points;
    const int count =
        static_cast<int>(std::floor((bracket.max - bracket.min) / bracket.step + 1e-9)) + 1;
    points.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) points.push_back(bracket.min + i * bracket.step);
    return points;
}

// Two-point (1-D) or three-point (2-D) Nelder-Mead over the bracket box;
// evaluations outside the box return +inf so the simplex stays inside.
class SimplexSearch {
  public:
    SimplexSearch(int dim, double tolerance, int max_iterations)
        : dim_(dim), tolerance_(tolerance), max_iterations_(max_iterations) {}

    using Point = std::array<double, 2>;
    using Objective = std::function<double(const Point&)>;

    Point run(const Point& start, double scale, const Objective& objective) {
        const int n = dim_ + 1;
        std::vector<Point> vertices(static_cast<std::size_t>(n), start);
        for (int i = 0; i < dim_; ++i) vertices[static_cast<std::size_t>(i + 1)][i] += scale;
        std::vector<double> values(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            values[static_cast<std::size_t>(i)] = objective(vertices[static_cast<std::size_t>(i)]);

        for (int iter = 0; iter < max_iterations_; ++iter) {
            // Order: best first.
            std::vector<std::size_t> index(static_cast<std::size_t>(n));
            for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
            std::stable_sort(index.begin(), index.end(), [&](std::size_t a, std::size_t b) {
                return values[a] < values[b];
            });
            const std::size_t best = index.front();
            const std::size_t worst = index.back();
            const std::size_t second_worst = index[index.size() - 2];

            double diameter = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    diameter = std::max(diameter,
                                        distance(vertices[static_cast<std::size_t>(i)],
                                                 vertices[static_cast<std::size_t>(j)]));
            if (diameter < tolerance_) break;

            Point centroid{0.0, 0.0};
            for (int i = 0; i < n; ++i) {
                if (static_cast<std::size_t>(i) == worst) continue;
                for (int c = 0; c < dim_; ++c)
                    centroid[c] += vertices[static_cast<std::size_t>(i)][c] / dim_;
            }

            const Point reflected = affine(centroid, vertices[worst], 1.0);
            const double f_reflected = objective(reflected);
            if (f_reflected < values[best]) {
                const Point expanded = affine(centroid, vertices[worst], 2.0);
                const double f_expanded = objective(expanded);
                if (f_expanded < f_reflected) {
                    vertices[worst] = expanded;
                    values[worst] = f_expanded;
                } else {
                    vertices[worst] = reflected;
                    values[worst] = f_reflected;
                }
                continue;
            }
            if (f_reflected < values[second_worst]) {
                vertices[worst] = reflected;
                values[worst] = f_reflected;
                continue;
            }
            const Point contracted = affine(centroid, vertices[worst], -0.5);
            const double f_contracted = objective(contracted);
            if (f_contracted < values[worst]) {
                vertices[worst] = contracted;
                values[worst] = f_contracted;
                continue;
            }
            // Shrink toward the best vertex.
            for (int i = 0; i < n; ++i) {
                if (static_cast<std::size_t>(i) == best) continue;
                for (int c = 0; c < dim_; ++c)
                    vertices[static_cast<std::size_t>(i)][c] =
                        0.5 * (vertices[best][c] + vertices[static_cast<std::size_t>(i)][c]);
                values[static_cast<std::size_t>(i)] =
                    objective(vertices[static_cast<std::size_t>(i)]);
            }
        }

        std::size_t best = 0;
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] < values[best]) best = i;
        return vertices[best];
    }

  private:
    double distance(const Point& a, const Point& b) const {
        double acc = 0.0;
        for (int c = 0; c < dim_; ++c) acc += (a[c] - b[c]) * (a[c] - b[c]);
        return std::sqrt(acc);
    }

    Point affine(const Point& centroid, const Point& away, double factor) const {
        Point out = centroid;
        for (int c = 0; c < dim_; ++c) out[c] = centroid[c] + factor * (centroid[c] - away[c]);
        return out;
    }

    int dim_;
    double tolerance_;
    int max_iterations_;
};

}  // namespace

OptimizationResult minimize_g(const ProbeConfig& probe_template,
                              const global_metric::SensingRegion& region,
                              const SearchSpec& search, global_metric::Engine engine, int nodes,
                              const global_metric::EngineOptions& options,
                              const global_metric::WeightMatrix& weight) {
    probe_template.validate();
    region.validate();
    search.bz.validate();
    if (search.bx) search.bx->validate();

    global_metric::EngineOptions engine_options = options;
    if (!engine_options.anchor_cache && engine == global_metric::Engine::ed)
        engine_options.anchor_cache = std::make_shared<global_metric::AnchorCache>();

    OptimizationResult result;
    auto evaluate = [&](double bx, double bz, bool grid_phase) {
        ProbeConfig probe = probe_template;
        if (search.bx) probe.control_x = bx;
        probe.control_z = bz;
        double value = kInf;
        bool ok = true;
        try {
            value = region.dim == 1
                        ? global_metric::g_single(probe, region, engine, nodes, engine_options)
                              .value
                        : global_metric::g_multi(probe, region, weight, nodes, engine,
                                                 engine_options)
                              .value;
        } catch (const Error&) {
            ok = false;
            ++result.failed_evaluations;
        }
        result.trace.push_back(TraceEntry{probe.control_x, bz, ok ? value : 0.0, ok, grid_phase});
        return ok ? value : kInf;
    };

    const std::vector<double> bx_points =
        search.bx ? bracket_points(*search.bx) : std::vector<double>{probe_template.control_x};
    const std::vector<double> bz_points = bracket_points(search.bz);

    double best_g = kInf;
    double best_bx = bx_points.front();
    double best_bz = bz_points.front();
    std::size_t best_ix = 0;
    std::size_t best_iz = 0;
    for (std::size_t ix = 0; ix < bx_points.size(); ++ix) {
        for (std::size_t iz = 0; iz < bz_points.size(); ++iz) {
            const double g = evaluate(bx_points[ix], bz_points[iz], /*grid_phase=*/true);
            // Lexicographic scan order makes "first strict improvement" the
            // tie rule the contract asks for.
            if (g < best_g - kTieWindow) {
                best_g = g;
                best_bx = bx_points[ix];
                best_bz = bz_points[iz];
                best_ix = ix;
                best_iz = iz;
            }
        }
    }
    if (!std::isfinite(best_g))
        throw Error("minimize_g: every grid evaluation failed");

    result.bx_star = best_bx;
    result.bz_star = best_bz;
    result.g_star = best_g;

    bool on_boundary = (search.bx && (best_ix == 0 || best_ix + 1 == bx_points.size())) ||
                       best_iz == 0 || best_iz + 1 == bz_points.size();

    if (search.polish) {
        const int dim = search.bx ? 2 : 1;
        const double scale = dim == 2 ? search.bx->step : search.bz.step;
        SimplexSearch simplex(dim, search.polish_tolerance * std::max(probe_template.coupling, 1e-12),
                              search.polish_max_iterations);

        auto objective = [&](const SimplexSearch::Point& p) {
            double bx = probe_template.control_x;
            double bz = 0.0;
            if (dim == 2) {
                bx = p[0];
                bz = p[1];
                if (bx < search.bx->min || bx > search.bx->max) return kInf;
            } else {
                bz = p[0];
            }
            if (bz < search.bz.min || bz > search.bz.max) return kInf;
            return evaluate(bx, bz, /*grid_phase=*/false);
        };

        SimplexSearch::Point start{0.0, 0.0};
        if (dim == 2) {
            start[0] = best_bx;
            start[1] = best_bz;
        } else {
            start[0] = best_bz;
        }
        simplex.run(start, scale, objective);

        for (const auto& entry : result.trace) {
            if (!entry.ok) continue;
            if (entry.g < result.g_star) {
                result.g_star = entry.g;
                result.bx_star = entry.bx;
                result.bz_star = entry.bz;
            }
        }
        const double half_z = 0.5 * search.bz.step;
        if (result.bz_star < search.bz.min + half_z || result.bz_star > search.bz.max - half_z)
            on_boundary = true;
        if (search.bx) {
            const double half_x = 0.5 * search.bx->step;
            if (result.bx_star < search.bx->min + half_x ||
                result.bx_star > search.bx->max - half_x)
                on_boundary = true;
        }
    }
    result.boundary_warning = on_boundary;
    return result;
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4)
        throw InvalidArgumentError("fit_scaling: need at least 4 (L, g) points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].first > 0.0) || !std::isfinite(points[i].second))
            throw InvalidArgumentError("fit_scaling: need L > 0 and finite g");
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i].first == points[j].first)
                throw InvalidArgumentError("fit_scaling: L values must be distinct");
    }

    double g_min = points[0].second;
    double g_max = points[0].second;
    for (const auto& [l, g] : points) {
        g_min = std::min(g_min, g);
        g_max = std::max(g_max, g);
    }

    ScalingFit fit;
    if (g_max - g_min <= 1e-13 * std::max(std::abs(g_max), std::abs(g_min))) {
        // Constant data: any exponent fits equally well.
        fit.ill_determined = true;
        fit.amplitude = 0.0;
        fit.exponent = 0.0;
        fit.offset = std::max(0.0, 0.5 * (g_min + g_max));
        return fit;
    }

    // Inner solve: given the exponent, (amplitude, offset) is linear least
    // squares with the offset clamped to >= 0.
    auto inner = [&](double b, double& a_out, double& c_out) {
        double suu = 0.0;
        double su = 0.0;
        double sug = 0.0;
        double sg = 0.0;
        const double n = static_cast<double>(points.size());
        for (const auto& [l, g] : points) {
            const double u = std::pow(l, -b);
            suu += u * u;
            su += u;
            sug += u * g;
            sg += g;
        }
        const double det = suu * n - su * su;
        double a = 0.0;
        double c = 0.0;
        if (std::abs(det) > 1e-300) {
            a = (sug * n - su * sg) / det;
            c = (suu * sg - su * sug) / det;
        }
        if (!(c >= 0.0) || std::abs(det) <= 1e-300) {
            c = 0.0;
            a = suu > 0.0 ? sug / suu : 0.0;
        }
        a_out = a;
        c_out = c;
        double sse = 0.0;
        for (const auto& [l, g] : points) {
            const double r = a * std::pow(l, -b) + c - g;
            sse += r * r;
        }
        return sse;
    };

    double best_b = 0.0;
    double best_sse = kInf;
    double a_tmp = 0.0;
    double c_tmp = 0.0;
    for (double b = -4.0; b <= 4.0 + 1e-12; b += 0.005) {
        const double sse = inner(b, a_tmp, c_tmp);
        if (sse < best_sse) {
            best_sse = sse;
            best_b = b;
        }
    }

    // Golden-section polish around the scan minimum.
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best_b - 0.005;
    double hi = best_b + 0.005;
    double x1 = hi - golden * (hi - lo);
    double x2 = lo + golden * (hi - lo);
    double f1 = inner(x1, a_tmp, c_tmp);
    double f2 = inner(x2, a_tmp, c_tmp);
    for (int iter = 0; iter < 80 && (hi - lo) > 1e-10; ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = inner(x1, a_tmp, c_tmp);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = inner(x2, a_tmp, c_tmp);
        }
    }
    fit.exponent = 0.5 * (lo + hi);
    fit.residual_norm = std::sqrt(inner(fit.exponent, fit.amplitude, fit.offset));
    return fit;
}

EfficiencyMap efficiency_map(const ProbeConfig& config,
                             const global_metric::SensingRegion& region,
                             const EfficiencyOptions& options) {
    config.validate();
    region.validate();
    if (region.dim != 2)
        throw InvalidArgumentError("efficiency_map: region must have dim == 2");
    if (options.grid_n < 1) throw InvalidArgumentError("efficiency_map: grid_n must be >= 1");

    const std::vector<Axis> axes{Axis::x, Axis::z};
    ProbeConfig zero_control = config;
    zero_control.control_x = 0.0;
    zero_control.control_z = 0.0;

    auto grid_value = [&](double center, double width, int i) {
        if (options.grid_n == 1) return center;
        return center - 0.5 * width +
               width * static_cast<double>(i) / static_cast<double>(options.grid_n - 1);
    };

    EfficiencyMap map;
    map.grid_n = options.grid_n;
    const std::size_t count = static_cast<std::size_t>(options.grid_n) *
                              static_cast<std::size_t>(options.grid_n);
    map.nodes.resize(count);

    parallel_for(count, options.threads, [&](std::size_t idx) {
        const int ix = static_cast<int>(idx) / options.grid_n;
        const int iz = static_cast<int>(idx) % options.grid_n;
        EfficiencyNode& node = map.nodes[idx];
        node.hx = grid_value(region.center_x, region.width_x, ix);
        node.hz = grid_value(region.center_z, region.width_z, iz);
        const FieldPoint h{node.hx, node.hz};
        try {
            fisher::QfiOptions qfi_options;
            qfi_options.derivative = config.dimension() <= spin_lattice::kDenseDimensionCap
                                         ? fisher::DerivativeMethod::perturbation
                                         : fisher::DerivativeMethod::finite_difference;
            qfi_options.fd_step = options.fd_step;
            const auto evaluation = fisher::qfi_evaluation(config, h, axes, qfi_options);

            fisher::SolverSettings cfi_settings;
            cfi_settings.center_state = &evaluation.ground.amplitudes;
            const auto cfi = fisher::cfi_matrix(config, h, axes, options.fd_step, cfi_settings);
            const auto cfi_zero = fisher::cfi_matrix(zero_control, h, axes, options.fd_step);

            const global_metric::WeightMatrix identity;
            const double tq = global_metric::scalar_bound_trace(evaluation.matrix, identity);
            const double tc = global_metric::scalar_bound_trace(cfi, identity);
            const double tc0 = global_metric::scalar_bound_trace(cfi_zero, identity);
            node.ratio_qfi_cfi = tq / tc;
            node.ratio_b0_bstar = tc0 / tc;
            node.ok = true;
        } catch (const Error&) {
            node.ok = false;
        }
    });

    map.min_ratio = kInf;
    map.max_ratio = -kInf;
    for (const auto& node : map.nodes) {
        if (!node.ok) {
            ++map.flagged;
            continue;
        }
        map.min_ratio = std::min(map.min_ratio, node.ratio_qfi_cfi);
        map.max_ratio = std::max(map.max_ratio, node.ratio_qfi_cfi);
    }
    if (map.flagged == static_cast<int>(map.nodes.size()))
        throw Error("efficiency_map: every grid node failed");
    return map;
}

}  // namespace critsense::probe_optimizer
