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

#ifndef CRITSENSE_QUADRATURE_HPP_
#define CRITSENSE_QUADRATURE_HPP_

#include <vector>

namespace critsense {

/// An n-point quadrature rule on [a, b]: sum_i weights[i] * f(nodes[i])
/// approximates the integral of f over [a, b].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial (exact for polynomials of degree 2n-1).
QuadratureRule gauss_legendre(int n);

/// The same rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace critsense

#endif  // CRITSENSE_QUADRATURE_HPP_
