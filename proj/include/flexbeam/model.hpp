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

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace flexbeam {

using Complex = std::complex<double>;

/// Linear-array layout: element coordinates (meters) plus the feasible
/// region [x_min, x_max] and the minimum element spacing d0.
///
/// Feasibility is checked by is_feasible(), not enforced at construction;
/// intermediate optimizer states are allowed to violate it.
struct ArrayGeometry {
    Eigen::VectorXd positions; // meters, length N
    double x_min = 0.0;        // meters
    double x_max = 0.0;        // meters
    double d0 = 0.0;           // minimum spacing, meters
};

/// Multipath cluster of one downlink user: per-path departure angles
/// (radians, in [0, pi]) and complex gains.
struct PathCluster {
    Eigen::VectorXd angles;  // length L_p
    Eigen::VectorXcd gains;  // length L_p
};

/// Immutable problem instance: user clusters, radar target and clutter
/// scatterers, noise powers, carrier wavelength. Target and clutter links
/// are single-path (one steering vector with one complex coefficient each).
struct Scenario {
    double wavelength = 0.0;         // lambda, meters
    int num_antennas = 0;            // N
    std::vector<PathCluster> users;  // K clusters
    Eigen::VectorXd user_noise;      // sigma_k^2, linear power, length K
    double target_angle = 0.0;       // theta_s, radians
    Complex target_gain{};           // alpha_s
    Eigen::VectorXd clutter_angles;  // radians, length C
    Eigen::VectorXcd clutter_gains;  // alpha_c, length C
    double sensing_noise = 0.0;      // sigma_s^2, linear power

    int num_users() const { return static_cast<int>(users.size()); }
    int num_clutter() const { return static_cast<int>(clutter_angles.size()); }
};

/// Knobs for seeded scenario generation.
struct ScenarioParams {
    int num_users = 4;     // K
    int num_clutter = 3;   // C
    int num_antennas = 4;  // N
    int num_paths = 13;    // L_p

    double wavelength = 0.1;                 // meters
    double target_angle = M_PI / 3.0;        // 60 degrees
    double gain_variance = 1.0;              // CN(0, v) for path and scatterer gains
    double user_noise = 1.0;                 // sigma_k^2, same for all users
    double sensing_noise = 1.0;              // sigma_s^2
};

/// Far-field array response at `angle` for a linear array at `positions`:
/// entry n is exp(j * (2*pi/wavelength) * positions[n] * cos(angle)).
/// Throws std::invalid_argument for non-positive wavelength.
Eigen::VectorXcd steering_vector(const Eigen::VectorXd& positions, double angle,
                                 double wavelength);

/// Downlink channel of user k: sqrt(N / L_p) * sum_l gain_l * a(angle_l).
/// Throws std::out_of_range for an invalid user index.
Eigen::VectorXcd user_channel(const Scenario& scenario, int k,
                              const Eigen::VectorXd& positions);

/// Seeded random instance: user/clutter angles uniform on [0, pi], path and
/// scatterer gains CN(0, gain_variance), target angle from params.
///
/// Draw order (fixed for reproducibility): per user k, its L_p angles then
/// its L_p gains; then the target gain; then all clutter angles; then all
/// clutter gains.
Scenario generate_scenario(std::uint64_t seed, const ScenarioParams& params);

/// True iff all positions lie in [x_min, x_max] and every pair differs by
/// at least d0 - 1e-12 (absolute slack for float round-off).
bool is_feasible(const ArrayGeometry& geometry);

/// Same check for candidate positions against the region of `geometry`.
bool is_feasible(const Eigen::VectorXd& positions, const ArrayGeometry& geometry);

} // namespace flexbeam
