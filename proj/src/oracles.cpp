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

#include "flexbeam/oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "flexbeam/metrics.hpp"

namespace flexbeam {

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& positions, const FDConfig& cfg) {
    Eigen::VectorXd grad(positions.size());
    Eigen::VectorXd probe = positions;
    for (Eigen::Index n = 0; n < positions.size(); ++n) {
        probe[n] = positions[n] + cfg.step;
        const double up = f(probe);
        probe[n] = positions[n] - cfg.step;
        const double down = f(probe);
        probe[n] = positions[n];
        grad[n] = (up - down) / (2.0 * cfg.step);
    }
    return grad;
}

ExhaustiveResult exhaustive_positions(const Scenario& scenario, const Beamformer& F,
                                      const AuxiliaryState& aux, const Weights& weights,
                                      const ArrayGeometry& geometry, double grid_step) {
    const Eigen::Index n_ant = F.rows();
    if (n_ant > 2)
        throw std::invalid_argument("exhaustive_positions: supports N <= 2 only");
    if (!(grid_step > 0.0))
        throw std::invalid_argument("exhaustive_positions: grid step must be positive");

    std::vector<double> grid;
    for (double g = geometry.x_min; g <= geometry.x_max + 1e-12; g += grid_step)
        grid.push_back(std::min(g, geometry.x_max));

    ExhaustiveResult best;
    best.value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd x(n_ant);

    if (n_ant == 1) {
        for (double g : grid) {
            x[0] = g;
            const double value = surrogate(F, x, aux, scenario, weights);
            if (value > best.value) {
                best.value = value;
                best.positions = x;
            }
        }
    } else {
        for (double g0 : grid) {
            for (double g1 : grid) {
                if (std::abs(g0 - g1) < geometry.d0 - 1e-12) continue;
                x[0] = g0;
                x[1] = g1;
                const double value = surrogate(F, x, aux, scenario, weights);
                if (value > best.value) { // lexicographically smallest tuple wins ties
                    best.value = value;
                    best.positions = x;
                }
            }
        }
    }

    if (!std::isfinite(best.value))
        throw InfeasibleError("exhaustive_positions: no feasible grid tuple");
    return best;
}

namespace {

// Golden-section maximization of a unimodal function on [lo, hi], followed by
// a parabolic polish of the peak.
template <typename Fn>
double golden_max(const Fn& f, double lo, double hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 140; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    double peak = 0.5 * (a + b);

    const double delta = 1e-4 * (1.0 + std::abs(peak));
    if (peak - delta >= lo && peak + delta <= hi) {
        const double left = f(peak - delta), mid = f(peak), right = f(peak + delta);
        const double curvature = left - 2.0 * mid + right;
        if (curvature < 0.0) {
            double refined = peak + 0.5 * delta * (left - right) / curvature;
            refined = std::clamp(refined, lo, hi);
            if (f(refined) >= mid) peak = refined;
        }
    }
    return std::clamp(peak, lo, hi);
}

} // namespace

AuxiliaryState numeric_aux_maximizer(const Beamformer& F, const Eigen::VectorXd& positions,
                                     const Scenario& scenario, const Weights& weights) {
    const int num_users = scenario.num_users();
    AuxiliaryState aux;
    aux.mu = Eigen::VectorXd::Zero(num_users + 1);
    aux.xi_c = Eigen::VectorXcd::Zero(num_users);
    aux.xi_s = Eigen::VectorXcd::Zero(num_users + 1);

    const auto eval = [&]() { return surrogate(F, positions, aux, scenario, weights); };

    // One real coordinate at a time. The surrogate is an exact concave
    // parabola in each xi component, so a single three-point fit maximizes
    // that coordinate.
    const auto improve_quadratic = [&](Complex& slot, bool imaginary) {
        const double base = imaginary ? slot.imag() : slot.real();
        const auto set = [&](double v) {
            if (imaginary)
                slot.imag(v);
            else
                slot.real(v);
        };
        set(base - 1.0);
        const double left = eval();
        set(base + 1.0);
        const double right = eval();
        set(base);
        const double mid = eval();
        const double curvature = left - 2.0 * mid + right;
        if (curvature >= -1e-14) return 0.0; // flat: this coordinate has no weight
        const double next = base + 0.5 * (left - right) / curvature;
        set(next);
        return std::abs(next - base);
    };

    for (int round = 0; round < 200; ++round) {
        double change = 0.0;

        for (int i = 0; i <= num_users; ++i) {
            const double before = aux.mu[i];
            const auto slice = [&](double m) {
                aux.mu[i] = m;
                return eval();
            };
            const double peak = golden_max(slice, 0.0, 1e6);
            aux.mu[i] = peak;
            change = std::max(change, std::abs(peak - before));
        }

        for (int i = 0; i < num_users; ++i) {
            change = std::max(change, improve_quadratic(aux.xi_c[i], false));
            change = std::max(change, improve_quadratic(aux.xi_c[i], true));
        }
        for (int i = 0; i <= num_users; ++i) {
            change = std::max(change, improve_quadratic(aux.xi_s[i], false));
            change = std::max(change, improve_quadratic(aux.xi_s[i], true));
        }

        if (change < 1e-10) break;
    }
    return aux;
}

} // namespace flexbeam
