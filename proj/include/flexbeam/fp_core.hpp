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

#include <limits>

#include "flexbeam/model.hpp"
#include "flexbeam/types.hpp"

namespace flexbeam {

/// Beamformer sub-problem in canonical quadratic shape: the F-dependent part
/// of the surrogate equals sum_k (2 Re{phi_k^H f_k} - f_k^H Lambda f_k).
/// Lambda is Hermitian PSD and shared across columns.
struct QuadraticForm {
    Eigen::MatrixXcd lambda_matrix; // N x N
    Eigen::MatrixXcd phi;           // N x (K+1), column k is phi_k
};

/// Bracket and stopping rule for the dual-variable search.
/// lambda_max = infinity means "bracket from ||Phi||_F / sqrt(P0), doubling
/// until the power constraint flips sign". tolerance <= 0 means 1e-8 * P0.
struct BisectionConfig {
    double lambda_min = 0.0;
    double lambda_max = std::numeric_limits<double>::infinity();
    double tolerance = -1.0; // absolute, on |Tr(F^H F) - P0|
    int max_iters = 200;
};

struct BeamformerUpdate {
    Beamformer F;
    double dual = 0.0; // lambda*
    int iterations = 0;
};

/// Builds the quadratic form for the current positions and auxiliaries:
///   Lambda = comm * sum_k |xi_k^c|^2 h_k h_k^H
///          + sense * ||xi_s||^2 (sum_c |alpha_c|^2 a_c a_c^H + |alpha_s|^2 a_s a_s^H)
///   phi_k  = comm * sqrt(1+mu_k) conj(xi_k^c) h_k
///          + sense * sqrt(1+mu_{K+1}) conj(alpha_s) conj(xi_k^s) a_s
/// (the sensing column has only the second term).
QuadraticForm assemble_quadratic_form(const Scenario& scenario,
                                      const Eigen::VectorXd& positions,
                                      const AuxiliaryState& aux,
                                      const Weights& weights);

/// F-independent remainder of the surrogate for this quadratic form, so that
/// surrogate(F) = sum_k (2 Re{phi_k^H f_k} - f_k^H Lambda f_k) + B.
double quadratic_form_constant(const Scenario& scenario, const AuxiliaryState& aux,
                               const Weights& weights);

/// Columns f_k = (Lambda + lambda I)^dagger phi_k. At lambda = 0 a rank-
/// deficient Lambda is handled by the pseudo-inverse (eigenvalues below a
/// relative threshold are dropped).
Beamformer beamformer_at(const QuadraticForm& qf, double lambda);

/// KKT solution of the power-constrained beamformer sub-problem. Returns the
/// unconstrained optimum with dual 0 when it fits the budget; otherwise
/// bisects the dual until |Tr(F^H F) - P0| <= tolerance.
/// Throws ConvergenceError if the iteration budget is exhausted.
BeamformerUpdate beamformer_update(const QuadraticForm& qf, double power_budget,
                                   const BisectionConfig& cfg = {});

/// Closed-form dual-transform update: mu_k = (R_k^2 + R_k sqrt(R_k^2+4)) / 2
/// with R_k = Re{xi_k^c h_k^H f_k} (users) and R_{K+1} = Re{alpha_s a_s^H F xi_s}.
/// Transiently negative R_k clamps to mu_k = 0.
Eigen::VectorXd update_mu(const Beamformer& F, const Eigen::VectorXd& positions,
                          const AuxiliaryState& aux, const Scenario& scenario,
                          const Weights& weights);

struct XiUpdate {
    Eigen::VectorXcd xi_c; // length K
    Eigen::VectorXcd xi_s; // length K+1
};

/// Closed-form quadratic-transform update, the exact maximizer of the
/// surrogate over xi at fixed (F, x, mu):
///   xi_k^c = sqrt(1+mu_k) conj(h_k^H f_k) / (sum_j |h_k^H f_j|^2 + sigma_k^2)
///   xi_s   = sqrt(1+mu_{K+1}) conj(alpha_s) F^H a_s
///            / (sum_c ||alpha_c a_c^H F||^2 + ||alpha_s a_s^H F||^2 + sigma_s^2)
XiUpdate update_xi(const Beamformer& F, const Eigen::VectorXd& positions,
                   const Eigen::VectorXd& mu, const Scenario& scenario,
                   const Weights& weights);

} // namespace flexbeam
