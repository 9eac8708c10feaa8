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

#include "flexbeam/model.hpp"

#include <cmath>
#include <stdexcept>

#include "flexbeam/rng.hpp"

namespace flexbeam {

Eigen::VectorXcd steering_vector(const Eigen::VectorXd& positions, double angle,
                                 double wavelength) {
    if (!(wavelength > 0.0))
        throw std::invalid_argument("steering_vector: wavelength must be positive");

    const double phase_rate = 2.0 * M_PI / wavelength * std::cos(angle);
    Eigen::VectorXcd a(positions.size());
    for (Eigen::Index n = 0; n < positions.size(); ++n)
        a[n] = std::polar(1.0, phase_rate * positions[n]);
    return a;
}

Eigen::VectorXcd user_channel(const Scenario& scenario, int k,
                              const Eigen::VectorXd& positions) {
    if (k < 0 || k >= scenario.num_users())
        throw std::out_of_range("user_channel: user index out of range");

    const PathCluster& cluster = scenario.users[static_cast<size_t>(k)];
    const Eigen::Index num_paths = cluster.angles.size();
    const double scale = std::sqrt(static_cast<double>(positions.size()) /
                                   static_cast<double>(num_paths));

    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(positions.size());
    for (Eigen::Index l = 0; l < num_paths; ++l)
        h += cluster.gains[l] * steering_vector(positions, cluster.angles[l],
                                                scenario.wavelength);
    return scale * h;
}

Scenario generate_scenario(std::uint64_t seed, const ScenarioParams& params) {
    Rng rng(seed);

    Scenario sc;
    sc.wavelength = params.wavelength;
    sc.num_antennas = params.num_antennas;
    sc.target_angle = params.target_angle;
    sc.sensing_noise = params.sensing_noise;
    sc.user_noise = Eigen::VectorXd::Constant(params.num_users, params.user_noise);

    sc.users.reserve(static_cast<size_t>(params.num_users));
    for (int k = 0; k < params.num_users; ++k) {
        PathCluster cluster;
        cluster.angles.resize(params.num_paths);
        cluster.gains.resize(params.num_paths);
        for (int l = 0; l < params.num_paths; ++l)
            cluster.angles[l] = rng.uniform(0.0, M_PI);
        for (int l = 0; l < params.num_paths; ++l)
            cluster.gains[l] = rng.cgauss(params.gain_variance);
        sc.users.push_back(std::move(cluster));
    }

    sc.target_gain = rng.cgauss(params.gain_variance);

    sc.clutter_angles.resize(params.num_clutter);
    sc.clutter_gains.resize(params.num_clutter);
    for (int c = 0; c < params.num_clutter; ++c)
        sc.clutter_angles[c] = rng.uniform(0.0, M_PI);
    for (int c = 0; c < params.num_clutter; ++c)
        sc.clutter_gains[c] = rng.cgauss(params.gain_variance);

    return sc;
}

namespace {
constexpr double kSpacingSlack = 1e-12;
}

bool is_feasible(const Eigen::VectorXd& positions, const ArrayGeometry& geometry) {
    for (Eigen::Index n = 0; n < positions.size(); ++n) {
        if (!std::isfinite(positions[n])) return false;
        if (positions[n] < geometry.x_min || positions[n] > geometry.x_max) return false;
    }
    for (Eigen::Index i = 0; i < positions.size(); ++i)
        for (Eigen::Index j = i + 1; j < positions.size(); ++j)
            if (std::abs(positions[i] - positions[j]) < geometry.d0 - kSpacingSlack)
                return false;
    return true;
}

bool is_feasible(const ArrayGeometry& geometry) {
    return is_feasible(geometry.positions, geometry);
}

} // namespace flexbeam
