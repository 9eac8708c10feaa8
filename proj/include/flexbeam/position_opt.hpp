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
#include <vector>

#include "flexbeam/model.hpp"
#include "flexbeam/types.hpp"

namespace flexbeam {

/// Antenna-position optimizer knobs. grid_step and initial_step default to
/// wavelength/20 and wavelength/10 when left non-positive.
struct PositionOptConfig {
    double grid_step = 0.0;     // meters; <= 0 -> wavelength / 20
    int ascent_max_iters = 50;  // coordinate sweeps / full-gradient steps
    double ascent_tol = 1e-6;   // meters, per-coordinate movement threshold
    double armijo_shrink = 0.5; // in (0, 1)
    double armijo_slope = 1e-4; // in (0, 1)
    double initial_step = 0.0;  // kappa^0, meters; <= 0 -> wavelength / 10
    int max_backtracks = 30;
};

/// Feasible positions plus the sort permutation used by the projection:
/// permutation[m] is the original antenna index of the m-th smallest entry.
struct ProjectionResult {
    Eigen::VectorXd positions;
    std::vector<int> permutation;
};

/// Analytic gradient of the surrogate with respect to the antenna positions.
/// Every surrogate term is linear or quadratic in gain-weighted sums of
/// steering vectors, whose entries differentiate as
/// d a_n / d x_n = j (2 pi / lambda) cos(theta) a_n; the chain rule is applied
/// term by term.
Eigen::VectorXd surrogate_gradient(const Eigen::VectorXd& positions, const Beamformer& F,
                                   const AuxiliaryState& aux, const Scenario& scenario,
                                   const Weights& weights);

/// Stage i of SPGA: sequential per-antenna search over the grid
/// {x_min, x_min + step, ...}. Antenna n is committed to the grid point that
/// maximizes the surrogate while staying >= d0 away from every antenna
/// committed before it (ties break toward the smallest coordinate); the
/// other antennas stay at their current values during the scan. The output
/// is feasible by construction.
/// Throws InfeasibleError when an antenna has no admissible grid point.
Eigen::VectorXd grid_init(const Eigen::VectorXd& positions, const Beamformer& F,
                          const AuxiliaryState& aux, const Scenario& scenario,
                          const Weights& weights, const ArrayGeometry& geometry,
                          const PositionOptConfig& cfg);

/// Stage ii of SPGA: Gauss-Seidel sweeps of per-coordinate gradient ascent
/// with Armijo backtracking. Stops when the largest per-sweep movement drops
/// below ascent_tol or the sweep budget runs out. The output may violate the
/// spacing constraints; projection is a separate stage.
Eigen::VectorXd coordinate_ascent(const Eigen::VectorXd& positions, const Beamformer& F,
                                  const AuxiliaryState& aux, const Scenario& scenario,
                                  const Weights& weights, const PositionOptConfig& cfg);

/// Stage iii of SPGA: sort, then sequentially clamp each coordinate into
/// [previous + d0, x_max - (remaining) * d0], then undo the sort. The result
/// is always feasible. Throws InfeasibleError when N*d0 > x_max - x_min.
ProjectionResult project_positions(const Eigen::VectorXd& positions,
                                   const ArrayGeometry& geometry);

/// 3-stage search / ascent / projection position update. Falls back to the
/// input positions whenever the projected result scores lower, so the caller
/// sees a nondecreasing surrogate.
Eigen::VectorXd spga(const Eigen::VectorXd& positions, const Beamformer& F,
                     const AuxiliaryState& aux, const Scenario& scenario,
                     const Weights& weights, const ArrayGeometry& geometry,
                     const PositionOptConfig& cfg);

/// Direct gradient-ascent baseline: per-coordinate Armijo steps from a
/// feasible start (no search stage), clamping to the feasibility boundary
/// and stopping on first contact. The output is feasible and never scores
/// below the input.
Eigen::VectorXd dga(const Eigen::VectorXd& positions, const Beamformer& F,
                    const AuxiliaryState& aux, const Scenario& scenario,
                    const Weights& weights, const ArrayGeometry& geometry,
                    const PositionOptConfig& cfg);

namespace detail {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Generic engines behind coordinate_ascent and dga, parameterized on the
/// objective so they can be driven by stubs in tests.
Eigen::VectorXd coordinate_ascent_impl(Eigen::VectorXd x, const ObjectiveFn& value,
                                       const GradientFn& grad, const PositionOptConfig& cfg,
                                       double default_step);
Eigen::VectorXd dga_impl(Eigen::VectorXd x, const ObjectiveFn& value, const GradientFn& grad,
                         const ArrayGeometry& geometry, const PositionOptConfig& cfg,
                         double default_step);

/// Largest alpha such that x + t*g stays feasible for all t in [0, alpha]
/// (box and pairwise-spacing constraints along the ray).
double max_feasible_step(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                         const ArrayGeometry& geometry);

} // namespace detail

} // namespace flexbeam
