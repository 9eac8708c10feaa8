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

#include "flexbeam/model.hpp"
#include "flexbeam/types.hpp"

namespace flexbeam {

/// SINR of user k: |h_k^H f_k|^2 over interference from every other column
/// (including the sensing column) plus sigma_k^2.
double sinr(int k, const Beamformer& F, const Scenario& scenario,
            const Eigen::VectorXd& positions);

/// Radar SCNR: ||alpha_s a_s^H F||^2 over clutter echo power plus sigma_s^2.
double scnr(const Beamformer& F, const Scenario& scenario,
            const Eigen::VectorXd& positions);

/// True objective in bits: comm * sum_k log2(1+SINR_k) + sense * log2(1+SCNR).
double objective(const Beamformer& F, const Eigen::VectorXd& positions,
                 const Scenario& scenario, const Weights& weights);

/// FP surrogate of the objective, in nats. Evaluated term by term in natural
/// log; maximizing it over the auxiliaries recovers the natural-log objective
/// (the bits-valued objective is the tight surrogate divided by ln 2).
/// Throws std::invalid_argument if any mu entry is negative.
double surrogate(const Beamformer& F, const Eigen::VectorXd& positions,
                 const AuxiliaryState& aux, const Scenario& scenario,
                 const Weights& weights);

/// Full metrics snapshot at one (F, x) point.
MetricsReport report(const Beamformer& F, const Eigen::VectorXd& positions,
                     const Scenario& scenario, const Weights& weights);

} // namespace flexbeam
