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

#include <string>
#include <string_view>
#include <vector>

#include "flexbeam/fp_core.hpp"
#include "flexbeam/metrics.hpp"
#include "flexbeam/model.hpp"
#include "flexbeam/position_opt.hpp"
#include "flexbeam/types.hpp"

namespace flexbeam {

enum class Algorithm {
    SpgaFbfMa, // search-based projected gradient ascent, movable antennas
    DgaFbfMa,  // direct gradient ascent baseline, movable antennas
    BfFpa,     // beamforming only, fixed uniform array
};

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

struct SolverConfig {
    double power_budget = 1.0; // P0, linear watts
    Weights weights{};
    double outer_tol = 1e-4; // relative surrogate change
    int outer_max_iters = 100;
    PositionOptConfig position{};
    BisectionConfig bisection{};
    Algorithm algorithm = Algorithm::SpgaFbfMa;
};

struct SolveResult {
    Beamformer F;
    Eigen::VectorXd positions;
    MetricsReport metrics;
    std::vector<double> surrogate_trajectory; // nats, one entry per outer iteration
    std::vector<double> objective_trajectory; // bits, same indexing
    int iterations = 0;
    double wall_ms = 0.0;
};

struct InitialState {
    Beamformer F;
    Eigen::VectorXd positions;
    AuxiliaryState aux;
};

/// Starting point for the alternating optimization: half-wavelength ULA
/// anchored at x_min, matched-filter columns (f_k along h_k, the sensing
/// column along a_s) scaled to equal per-column power summing to P0, and
/// auxiliaries initialized at their fixed point for (F0, x0).
/// Throws InfeasibleError when the ULA does not fit the region.
InitialState initialize(const Scenario& scenario, const ArrayGeometry& geometry,
                        const SolverConfig& cfg);

/// Outer alternating optimization: per iteration update F (KKT + bisection),
/// then the positions (SPGA followed by a beamformer-refitting lookahead
/// search, or DGA; skipped for the fixed-array baseline), then the
/// auxiliaries iterated to their joint fixed point so the recorded
/// trajectory is tight. Position updates are adopted only when the true
/// objective does not decrease. Stops when the relative surrogate change
/// drops below outer_tol or the iteration budget is reached.
SolveResult solve(const Scenario& scenario, const ArrayGeometry& geometry,
                  const SolverConfig& cfg);

} // namespace flexbeam
