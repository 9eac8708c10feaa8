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

#include <cmath>

#include "flexbeam/fp_core.hpp"
#include "flexbeam/metrics.hpp"
#include "flexbeam/model.hpp"
#include "flexbeam/rng.hpp"

namespace flexbeam::test {

inline Scenario make_scenario(std::uint64_t seed, int n_ant = 4, int users = 4,
                              int clutter = 3, int paths = 13) {
    ScenarioParams params;
    params.num_antennas = n_ant;
    params.num_users = users;
    params.num_clutter = clutter;
    params.num_paths = paths;
    return generate_scenario(seed, params);
}

inline Eigen::VectorXd random_positions(Rng& rng, int n_ant, double x_min, double x_max,
                                        double d0) {
    Eigen::VectorXd x(n_ant);
    for (;;) {
        for (int i = 0; i < n_ant; ++i) x[i] = rng.uniform(x_min, x_max);
        bool ok = true;
        for (int i = 0; i < n_ant && ok; ++i)
            for (int j = i + 1; j < n_ant; ++j)
                if (std::abs(x[i] - x[j]) < d0) {
                    ok = false;
                    break;
                }
        if (ok) return x;
    }
}

inline Beamformer random_beamformer(Rng& rng, int n_ant, int users, double power = 1.0) {
    Beamformer F(n_ant, users + 1);
    for (int c = 0; c <= users; ++c)
        for (int r = 0; r < n_ant; ++r) F(r, c) = rng.cgauss(1.0);
    return std::sqrt(power / F.squaredNorm()) * F;
}

// Closed-form alternation to the joint auxiliary fixed point.
inline AuxiliaryState fixed_point_aux(const Beamformer& F, const Eigen::VectorXd& x,
                                      const Scenario& sc, const Weights& w,
                                      int max_rounds = 50) {
    AuxiliaryState aux;
    aux.mu = Eigen::VectorXd::Zero(sc.num_users() + 1);
    XiUpdate xi = update_xi(F, x, aux.mu, sc, w);
    aux.xi_c = xi.xi_c;
    aux.xi_s = xi.xi_s;
    for (int r = 0; r < max_rounds; ++r) {
        aux.mu = update_mu(F, x, aux, sc, w);
        xi = update_xi(F, x, aux.mu, sc, w);
        aux.xi_c = xi.xi_c;
        aux.xi_s = xi.xi_s;
    }
    return aux;
}

// Weighted natural-log objective, the value a tight surrogate must equal.
inline double log_objective(const Beamformer& F, const Eigen::VectorXd& x,
                            const Scenario& sc, const Weights& w) {
    double value = 0.0;
    for (int k = 0; k < sc.num_users(); ++k)
        value += w.comm * std::log(1.0 + sinr(k, F, sc, x));
    return value + w.sense() * std::log(1.0 + scnr(F, sc, x));
}

} // namespace flexbeam::test
