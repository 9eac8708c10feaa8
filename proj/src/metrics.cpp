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

#include "flexbeam/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace flexbeam {

namespace {

// Row vector alpha * a(angle)^H * F as a (K+1)-vector of per-column echoes.
Eigen::VectorXcd echo_row(const Beamformer& F, const Scenario& scenario,
                          const Eigen::VectorXd& positions, double angle, Complex gain) {
    Eigen::VectorXcd a = steering_vector(positions, angle, scenario.wavelength);
    return gain * (a.adjoint() * F).transpose();
}

} // namespace

double sinr(int k, const Beamformer& F, const Scenario& scenario,
            const Eigen::VectorXd& positions) {
    const Eigen::VectorXcd h = user_channel(scenario, k, positions);
    const Eigen::VectorXcd received = (h.adjoint() * F).transpose(); // h^H f_j per column

    const double signal = std::norm(received[k]);
    double interference = 0.0;
    for (Eigen::Index j = 0; j < received.size(); ++j)
        if (j != k) interference += std::norm(received[j]);
    return signal / (interference + scenario.user_noise[k]);
}

double scnr(const Beamformer& F, const Scenario& scenario,
            const Eigen::VectorXd& positions) {
    const double target = echo_row(F, scenario, positions, scenario.target_angle,
                                   scenario.target_gain)
                              .squaredNorm();
    double clutter = 0.0;
    for (int c = 0; c < scenario.num_clutter(); ++c)
        clutter += echo_row(F, scenario, positions, scenario.clutter_angles[c],
                            scenario.clutter_gains[c])
                       .squaredNorm();
    return target / (clutter + scenario.sensing_noise);
}

double objective(const Beamformer& F, const Eigen::VectorXd& positions,
                 const Scenario& scenario, const Weights& weights) {
    double sum_rate = 0.0;
    for (int k = 0; k < scenario.num_users(); ++k)
        sum_rate += std::log2(1.0 + sinr(k, F, scenario, positions));
    const double mi = std::log2(1.0 + scnr(F, scenario, positions));
    return weights.comm * sum_rate + weights.sense() * mi;
}

double surrogate(const Beamformer& F, const Eigen::VectorXd& positions,
                 const AuxiliaryState& aux, const Scenario& scenario,
                 const Weights& weights) {
    const int num_users = scenario.num_users();
    if ((aux.mu.array() < 0.0).any())
        throw std::invalid_argument("surrogate: mu entries must be nonnegative");

    double value = 0.0;
    for (int k = 0; k < num_users; ++k)
        value += weights.comm * (std::log(1.0 + aux.mu[k]) - aux.mu[k]);
    const double mu_s = aux.mu[num_users];
    value += weights.sense() * (std::log(1.0 + mu_s) - mu_s);

    // communication quadratic-transform terms
    for (int k = 0; k < num_users; ++k) {
        const Eigen::VectorXcd h = user_channel(scenario, k, positions);
        const Eigen::VectorXcd received = (h.adjoint() * F).transpose();
        const double total_power = received.squaredNorm() + scenario.user_noise[k];
        const double linear =
            2.0 * std::sqrt(1.0 + aux.mu[k]) * std::real(aux.xi_c[k] * received[k]);
        value += weights.comm * (linear - std::norm(aux.xi_c[k]) * total_power);
    }

    // sensing quadratic-transform term
    const Eigen::VectorXcd target_row = echo_row(F, scenario, positions,
                                                 scenario.target_angle, scenario.target_gain);
    double clutter = 0.0;
    for (int c = 0; c < scenario.num_clutter(); ++c)
        clutter += echo_row(F, scenario, positions, scenario.clutter_angles[c],
                            scenario.clutter_gains[c])
                       .squaredNorm();
    const double denom = clutter + target_row.squaredNorm() + scenario.sensing_noise;
    const Complex aligned = (target_row.array() * aux.xi_s.array()).sum();
    const double linear = 2.0 * std::sqrt(1.0 + mu_s) * std::real(aligned);
    value += weights.sense() * (linear - aux.xi_s.squaredNorm() * denom);

    return value;
}

MetricsReport report(const Beamformer& F, const Eigen::VectorXd& positions,
                     const Scenario& scenario, const Weights& weights) {
    MetricsReport r;
    const int num_users = scenario.num_users();
    r.sinr.resize(num_users);
    r.rate_bits.resize(num_users);
    for (int k = 0; k < num_users; ++k) {
        r.sinr[k] = sinr(k, F, scenario, positions);
        r.rate_bits[k] = std::log2(1.0 + r.sinr[k]);
    }
    r.scnr = scnr(F, scenario, positions);
    r.sensing_mi_bits = std::log2(1.0 + r.scnr);
    r.objective_bits = weights.comm * r.rate_bits.sum() + weights.sense() * r.sensing_mi_bits;
    return r;
}

} // namespace flexbeam
