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

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace flexbeam {

/// Transmit beamforming matrix, N x (K+1). Columns 0..K-1 serve the K users,
/// column K is the dedicated sensing stream.
using Beamformer = Eigen::MatrixXcd;

/// Priority split between communication and sensing. Only the communication
/// weight is stored; the sensing weight is derived so the two always sum to 1.
struct Weights {
    double comm = 0.5; // varpi_c in [0, 1]

    double sense() const { return 1.0 - comm; }
};

/// Fractional-programming auxiliaries: mu (K+1 nonnegative reals) from the
/// Lagrangian dual transform, xi_c (K) and xi_s (K+1) from the quadratic
/// transform of the communication and sensing ratios.
struct AuxiliaryState {
    Eigen::VectorXd mu;     // length K+1, entries >= 0
    Eigen::VectorXcd xi_c;  // length K
    Eigen::VectorXcd xi_s;  // length K+1
};

/// Closed-form performance snapshot at one (F, x) point.
struct MetricsReport {
    Eigen::VectorXd sinr;          // linear, per user
    Eigen::VectorXd rate_bits;     // log2(1 + SINR_k), per user
    double scnr = 0.0;             // linear
    double sensing_mi_bits = 0.0;  // log2(1 + SCNR)
    double objective_bits = 0.0;   // comm * sum(rate) + sense * MI

    double sum_rate_bits() const { return rate_bits.size() ? rate_bits.sum() : 0.0; }
};

/// Geometry cannot admit any feasible layout, or an optimizer stage was
/// handed an infeasible region.
class InfeasibleError : public std::runtime_error {
  public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative sub-solver ran out of budget; carries the last iterate so the
/// caller can inspect how far it got.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, Beamformer last_iterate, double dual)
        : std::runtime_error(what), last_(std::move(last_iterate)), dual_(dual) {}

    const Beamformer& last_iterate() const { return last_; }
    double dual() const { return dual_; }

  private:
    Beamformer last_;
    double dual_ = 0.0;
};

} // namespace flexbeam
