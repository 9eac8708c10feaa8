// SPDX-License-Identifier: Apache-2.0
//
// flexbeam: flexible beamforming for movable-antenna ISAC systems
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <functional>

#include "flexbeam/model.hpp"
#include "flexbeam/types.hpp"

// Slow, obviously-correct reference implementations. They deliberately avoid
// the closed forms they cross-check and are used by tests, the acceptance
// suite and the `verify` CLI command.

namespace flexbeam {

struct FDConfig {
    double step = 1e-6; // meters, central-difference half-width
};

/// Central finite differences of a scalar function of the positions.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& positions, const FDConfig& cfg = {});

struct ExhaustiveResult {
    Eigen::VectorXd positions;
    double value = 0.0;
};

/// Brute-force surrogate maximization over every feasible grid tuple at the
/// given resolution (ties break toward the lexicographically smallest tuple).
/// Supports N <= 2 only; throws std::invalid_argument above that.
ExhaustiveResult exhaustive_positions(const Scenario& scenario, const Beamformer& F,
                                      const AuxiliaryState& aux, const Weights& weights,
                                      const ArrayGeometry& geometry, double grid_step);

/// Numeric maximization of the surrogate over the auxiliaries: golden-section
/// per mu coordinate, parabolic line maximization per real/imaginary xi
/// coordinate, iterated to a joint fixed point. Uses only surrogate
/// evaluations, never the closed-form updates it validates.
AuxiliaryState numeric_aux_maximizer(const Beamformer& F, const Eigen::VectorXd& positions,
                                     const Scenario& scenario, const Weights& weights);

} // namespace flexbeam
