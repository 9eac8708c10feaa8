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

#include "flexbeam/position_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "flexbeam/metrics.hpp"

namespace flexbeam {

namespace {

constexpr double kSpacingSlack = 1e-12;

double grid_step_or_default(const PositionOptConfig& cfg, double wavelength) {
    return cfg.grid_step > 0.0 ? cfg.grid_step : wavelength / 20.0;
}

std::vector<double> make_grid(double x_min, double x_max, double step) {
    const auto count = static_cast<Eigen::Index>(std::floor((x_max - x_min) / step + 1e-9)) + 1;
    std::vector<double> grid(static_cast<size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i)
        grid[static_cast<size_t>(i)] = std::min(x_min + static_cast<double>(i) * step, x_max);
    return grid;
}

// Surrogate evaluation specialized for moving a single antenna: everything
// contributed by the fixed antennas is cached, so scanning one coordinate
// over hundreds of grid points costs O(K*L_p + C) per candidate instead of a
// full re-synthesis of all channels.
class SingleMoveEvaluator {
  public:
    SingleMoveEvaluator(const Eigen::VectorXd& positions, const Beamformer& F,
                        const AuxiliaryState& aux, const Scenario& scenario,
                        const Weights& weights)
        : f_(F), aux_(aux), scenario_(scenario), weights_(weights),
          beta_(2.0 * M_PI / scenario.wavelength),
          num_users_(scenario.num_users()), num_cols_(scenario.num_users() + 1) {
        const Eigen::Index n = positions.size();
        path_scale_ = std::sqrt(static_cast<double>(n) /
                                static_cast<double>(scenario.users[0].angles.size()));

        channels_.resize(static_cast<size_t>(num_users_));
        received_.resize(static_cast<size_t>(num_users_));
        for (int k = 0; k < num_users_; ++k) {
            channels_[static_cast<size_t>(k)] = user_channel(scenario, k, positions);
            received_[static_cast<size_t>(k)] =
                (channels_[static_cast<size_t>(k)].adjoint() * F).transpose();
        }

        radar_angles_.push_back(scenario.target_angle);
        radar_gains_.push_back(scenario.target_gain);
        for (int c = 0; c < scenario.num_clutter(); ++c) {
            radar_angles_.push_back(scenario.clutter_angles[c]);
            radar_gains_.push_back(scenario.clutter_gains[c]);
        }
        radar_steer_.resize(radar_angles_.size());
        radar_rows_.resize(radar_angles_.size());
        for (size_t r = 0; r < radar_angles_.size(); ++r) {
            radar_steer_[r] = steering_vector(positions, radar_angles_[r],
                                              scenario.wavelength);
            radar_rows_[r] = (radar_steer_[r].adjoint() * F).transpose(); // unscaled a^H f_j
        }

        constant_ = 0.0;
        for (int k = 0; k < num_users_; ++k) {
            constant_ += weights.comm * (std::log(1.0 + aux.mu[k]) - aux.mu[k]);
            constant_ -= weights.comm * std::norm(aux.xi_c[k]) * scenario.user_noise[k];
        }
        const double mu_s = aux.mu[num_users_];
        constant_ += weights.sense() * (std::log(1.0 + mu_s) - mu_s);
        constant_ -= weights.sense() * aux.xi_s.squaredNorm() * scenario.sensing_noise;
    }

    // Caches the inner products with antenna `n` removed.
    void set_moved(int n) {
        moved_ = n;
        user_partial_.resize(static_cast<size_t>(num_users_));
        for (int k = 0; k < num_users_; ++k) {
            const auto& h = channels_[static_cast<size_t>(k)];
            user_partial_[static_cast<size_t>(k)] =
                received_[static_cast<size_t>(k)] -
                (std::conj(h[n]) * f_.row(n).transpose()).eval();
        }
        radar_partial_.resize(radar_steer_.size());
        for (size_t r = 0; r < radar_steer_.size(); ++r)
            radar_partial_[r] = radar_rows_[r] -
                                (std::conj(radar_steer_[r][n]) * f_.row(n).transpose()).eval();
    }

    // Surrogate value with the moved antenna at `coord`.
    double value_at(double coord) const {
        const int n = moved_;
        double value = constant_;

        for (int k = 0; k < num_users_; ++k) {
            const PathCluster& cluster = scenario_.users[static_cast<size_t>(k)];
            Complex hn{0.0, 0.0};
            for (Eigen::Index l = 0; l < cluster.angles.size(); ++l)
                hn += cluster.gains[l] *
                      std::polar(1.0, beta_ * std::cos(cluster.angles[l]) * coord);
            hn *= path_scale_;

            const auto& partial = user_partial_[static_cast<size_t>(k)];
            double total_power = scenario_.user_noise[k];
            Complex own{};
            for (int j = 0; j < num_cols_; ++j) {
                const Complex u = partial[j] + std::conj(hn) * f_(n, j);
                total_power += std::norm(u);
                if (j == k) own = u;
            }
            const double linear =
                2.0 * std::sqrt(1.0 + aux_.mu[k]) * std::real(aux_.xi_c[k] * own);
            value += weights_.comm *
                     (linear - std::norm(aux_.xi_c[k]) * total_power);
        }

        const double mu_s = aux_.mu[num_users_];
        double clutter = 0.0;
        double target_power = 0.0;
        Complex aligned{};
        for (size_t r = 0; r < radar_partial_.size(); ++r) {
            const Complex an = std::polar(1.0, beta_ * std::cos(radar_angles_[r]) * coord);
            double row_power = 0.0;
            Complex row_aligned{};
            for (int j = 0; j < num_cols_; ++j) {
                const Complex e = radar_gains_[r] *
                                  (radar_partial_[r][j] + std::conj(an) * f_(n, j));
                row_power += std::norm(e);
                if (r == 0) row_aligned += e * aux_.xi_s[j];
            }
            if (r == 0) {
                target_power = row_power;
                aligned = row_aligned;
            } else {
                clutter += row_power;
            }
        }
        const double denom = clutter + target_power + scenario_.sensing_noise;
        const double linear = 2.0 * std::sqrt(1.0 + mu_s) * std::real(aligned);
        value += weights_.sense() * (linear - aux_.xi_s.squaredNorm() * denom);
        return value;
    }

  private:
    const Beamformer& f_;
    const AuxiliaryState& aux_;
    const Scenario& scenario_;
    const Weights& weights_;
    double beta_;
    int num_users_;
    int num_cols_;
    double path_scale_ = 1.0;
    double constant_ = 0.0;
    int moved_ = 0;

    std::vector<Eigen::VectorXcd> channels_;  // h_k at the construction positions
    std::vector<Eigen::VectorXcd> received_;  // h_k^H f_j per column
    std::vector<double> radar_angles_;        // target first, then clutters
    std::vector<Complex> radar_gains_;
    std::vector<Eigen::VectorXcd> radar_steer_;
    std::vector<Eigen::VectorXcd> radar_rows_;
    std::vector<Eigen::VectorXcd> user_partial_;
    std::vector<Eigen::VectorXcd> radar_partial_;
};

} // namespace

Eigen::VectorXd surrogate_gradient(const Eigen::VectorXd& positions, const Beamformer& F,
                                   const AuxiliaryState& aux, const Scenario& scenario,
                                   const Weights& weights) {
    const Eigen::Index n_ant = positions.size();
    const int num_users = scenario.num_users();
    const double beta = 2.0 * M_PI / scenario.wavelength;
    const Complex jay{0.0, 1.0};

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_ant);

    // Communication terms. For each user, d_k[n] collects the per-path phase
    // derivative of the channel entry: d/dx_n h_k[n] = j*beta*cos(theta_l)
    // applied path by path (each path has its own angle).
    for (int k = 0; k < num_users; ++k) {
        const PathCluster& cluster = scenario.users[static_cast<size_t>(k)];
        const double scale = std::sqrt(static_cast<double>(n_ant) /
                                       static_cast<double>(cluster.angles.size()));
        const Eigen::VectorXcd h = user_channel(scenario, k, positions);
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(n_ant);
        for (Eigen::Index l = 0; l < cluster.angles.size(); ++l) {
            const double rate = beta * std::cos(cluster.angles[l]);
            d += cluster.gains[l] * (jay * rate) *
                 steering_vector(positions, cluster.angles[l], scenario.wavelength);
        }
        d *= scale;

        const Eigen::VectorXcd received = (h.adjoint() * F).transpose(); // u_{k,j}
        const Eigen::VectorXcd v = F * received.conjugate();             // sum_j conj(u) f_j
        const double root = std::sqrt(1.0 + aux.mu[k]);
        for (Eigen::Index n = 0; n < n_ant; ++n) {
            const Complex dn_conj = std::conj(d[n]);
            const double linear = 2.0 * root * std::real(aux.xi_c[k] * dn_conj * F(n, k));
            const double quad = 2.0 * std::real(dn_conj * v[n]);
            grad[n] += weights.comm * (linear - std::norm(aux.xi_c[k]) * quad);
        }
    }

    // Sensing terms: one linear term through F*xi_s, and quadratic echo-power
    // terms for the target and every clutter scatterer.
    const double mu_s = aux.mu[num_users];
    const double root_s = std::sqrt(1.0 + mu_s);
    const double xi_s_norm2 = aux.xi_s.squaredNorm();

    std::vector<double> angles{scenario.target_angle};
    std::vector<Complex> gains{scenario.target_gain};
    for (int c = 0; c < scenario.num_clutter(); ++c) {
        angles.push_back(scenario.clutter_angles[c]);
        gains.push_back(scenario.clutter_gains[c]);
    }

    const Eigen::VectorXcd f_xi = F * aux.xi_s;
    for (size_t r = 0; r < angles.size(); ++r) {
        const double rate = beta * std::cos(angles[r]);
        const Eigen::VectorXcd a = steering_vector(positions, angles[r], scenario.wavelength);
        const Eigen::VectorXcd row = gains[r] * (a.adjoint() * F).transpose(); // alpha a^H f_j
        const Eigen::VectorXcd w = F * row.conjugate();
        for (Eigen::Index n = 0; n < n_ant; ++n) {
            const Complex factor = gains[r] * (-jay * rate) * std::conj(a[n]);
            if (r == 0) {
                const double linear = 2.0 * root_s * std::real(factor * f_xi[n]);
                grad[n] += weights.sense() * linear;
            }
            const double quad = 2.0 * std::real(factor * w[n]);
            grad[n] -= weights.sense() * xi_s_norm2 * quad;
        }
    }

    return grad;
}

Eigen::VectorXd grid_init(const Eigen::VectorXd& positions, const Beamformer& F,
                          const AuxiliaryState& aux, const Scenario& scenario,
                          const Weights& weights, const ArrayGeometry& geometry,
                          const PositionOptConfig& cfg) {
    const double step = grid_step_or_default(cfg, scenario.wavelength);
    if (step > (geometry.x_max - geometry.x_min) / 2.0)
        throw std::invalid_argument("grid_init: grid step exceeds half the region span");

    const std::vector<double> grid = make_grid(geometry.x_min, geometry.x_max, step);
    const Eigen::Index n_ant = positions.size();

    Eigen::VectorXd x = positions;
    std::vector<double> committed;
    committed.reserve(static_cast<size_t>(n_ant));

    for (Eigen::Index n = 0; n < n_ant; ++n) {
        // Rebuild the cache: previously committed antennas have moved.
        SingleMoveEvaluator eval(x, F, aux, scenario, weights);
        eval.set_moved(static_cast<int>(n));

        double best = -std::numeric_limits<double>::infinity();
        double best_coord = std::numeric_limits<double>::quiet_NaN();
        for (double g : grid) {
            bool admissible = true;
            for (double c : committed)
                if (std::abs(g - c) < geometry.d0 - kSpacingSlack) {
                    admissible = false;
                    break;
                }
            if (!admissible) continue;
            const double value = eval.value_at(g);
            if (value > best) { // strict: ties keep the smallest coordinate
                best = value;
                best_coord = g;
            }
        }
        if (!std::isfinite(best))
            throw InfeasibleError("grid_init: no admissible grid point for an antenna");
        x[n] = best_coord;
        committed.push_back(best_coord);
    }
    return x;
}

namespace detail {

Eigen::VectorXd coordinate_ascent_impl(Eigen::VectorXd x, const ObjectiveFn& value,
                                       const GradientFn& grad, const PositionOptConfig& cfg,
                                       double default_step) {
    const double kappa0 = cfg.initial_step > 0.0 ? cfg.initial_step : default_step;
    for (int sweep = 0; sweep < cfg.ascent_max_iters; ++sweep) {
        double max_move = 0.0;
        for (Eigen::Index n = 0; n < x.size(); ++n) {
            const double g = grad(x)[n];
            if (g == 0.0) continue;
            const double fx = value(x);
            double kappa = kappa0;
            Eigen::VectorXd trial = x;
            bool accepted = false;
            for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
                trial[n] = x[n] + kappa * g;
                if (value(trial) >= fx + cfg.armijo_slope * kappa * g * g) {
                    accepted = true;
                    break;
                }
                kappa *= cfg.armijo_shrink;
            }
            if (!accepted) continue; // skip this coordinate
            max_move = std::max(max_move, std::abs(kappa * g));
            x[n] = trial[n];
        }
        if (max_move < cfg.ascent_tol) break;
    }
    return x;
}

double max_feasible_step(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                         const ArrayGeometry& geometry) {
    double alpha = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < x.size(); ++n) {
        if (g[n] > 0.0)
            alpha = std::min(alpha, (geometry.x_max - x[n]) / g[n]);
        else if (g[n] < 0.0)
            alpha = std::min(alpha, (geometry.x_min - x[n]) / g[n]);
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (Eigen::Index j = i + 1; j < x.size(); ++j) {
            double delta = x[i] - x[j];
            double v = g[i] - g[j];
            if (delta < 0.0) {
                delta = -delta;
                v = -v;
            }
            if (v < 0.0) // separation shrinks along the ray
                alpha = std::min(alpha, (delta - geometry.d0) / (-v));
        }
    }
    return std::max(alpha, 0.0);
}

Eigen::VectorXd dga_impl(Eigen::VectorXd x, const ObjectiveFn& value, const GradientFn& grad,
                         const ArrayGeometry& geometry, const PositionOptConfig& cfg,
                         double default_step) {
    const double kappa0 = cfg.initial_step > 0.0 ? cfg.initial_step : default_step;
    for (int sweep = 0; sweep < cfg.ascent_max_iters; ++sweep) {
        double max_move = 0.0;
        for (Eigen::Index n = 0; n < x.size(); ++n) {
            const double g = grad(x)[n];
            if (g == 0.0) continue;
            const double fx = value(x);
            double kappa = kappa0;
            Eigen::VectorXd trial = x;
            bool accepted = false;
            for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
                trial[n] = x[n] + kappa * g;
                if (value(trial) >= fx + cfg.armijo_slope * kappa * g * g) {
                    accepted = true;
                    break;
                }
                kappa *= cfg.armijo_shrink;
            }
            if (!accepted) continue;

            if (is_feasible(trial, geometry)) {
                max_move = std::max(max_move, std::abs(kappa * g));
                x[n] = trial[n];
                continue;
            }

            // Constraint contact: clamp the move to the feasible extent along
            // the gradient direction; the coordinate stops at the boundary.
            Eigen::VectorXd direction = Eigen::VectorXd::Zero(x.size());
            direction[n] = g;
            const double alpha = std::min(max_feasible_step(x, direction, geometry), kappa);
            trial[n] = x[n] + alpha * g;
            if (value(trial) >= fx && is_feasible(trial, geometry)) {
                max_move = std::max(max_move, std::abs(alpha * g));
                x = trial;
            }
        }
        if (max_move < cfg.ascent_tol) break;
    }
    return x;
}

} // namespace detail

Eigen::VectorXd coordinate_ascent(const Eigen::VectorXd& positions, const Beamformer& F,
                                  const AuxiliaryState& aux, const Scenario& scenario,
                                  const Weights& weights, const PositionOptConfig& cfg) {
    const auto value = [&](const Eigen::VectorXd& x) {
        return surrogate(F, x, aux, scenario, weights);
    };
    const auto grad = [&](const Eigen::VectorXd& x) {
        return surrogate_gradient(x, F, aux, scenario, weights);
    };
    return detail::coordinate_ascent_impl(positions, value, grad, cfg,
                                          scenario.wavelength / 10.0);
}

ProjectionResult project_positions(const Eigen::VectorXd& positions,
                                   const ArrayGeometry& geometry) {
    const Eigen::Index n_ant = positions.size();
    const double span = geometry.x_max - geometry.x_min;
    if (static_cast<double>(n_ant) * geometry.d0 > span + kSpacingSlack)
        throw InfeasibleError("project_positions: region cannot hold N antennas at spacing d0");

    std::vector<int> order(static_cast<size_t>(n_ant));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return positions[a] < positions[b]; });

    Eigen::VectorXd sorted(n_ant);
    for (Eigen::Index m = 0; m < n_ant; ++m)
        sorted[m] = positions[order[static_cast<size_t>(m)]];

    for (Eigen::Index m = 0; m < n_ant; ++m) {
        const double lo = m == 0 ? geometry.x_min : sorted[m - 1] + geometry.d0;
        const double hi =
            geometry.x_max - static_cast<double>(n_ant - 1 - m) * geometry.d0;
        // lo can exceed hi by one ulp when the chain rides the upper caps;
        // resolving toward hi keeps the projection exactly idempotent
        sorted[m] = std::min(std::max(sorted[m], lo), hi);
    }

    ProjectionResult result;
    result.positions.resize(n_ant);
    for (Eigen::Index m = 0; m < n_ant; ++m)
        result.positions[order[static_cast<size_t>(m)]] = sorted[m];
    result.permutation = std::move(order);
    return result;
}

Eigen::VectorXd spga(const Eigen::VectorXd& positions, const Beamformer& F,
                     const AuxiliaryState& aux, const Scenario& scenario,
                     const Weights& weights, const ArrayGeometry& geometry,
                     const PositionOptConfig& cfg) {
    const Eigen::VectorXd searched = grid_init(positions, F, aux, scenario, weights,
                                               geometry, cfg);
    const Eigen::VectorXd ascended =
        coordinate_ascent(searched, F, aux, scenario, weights, cfg);
    const Eigen::VectorXd projected = project_positions(ascended, geometry).positions;

    // Projection can undo ascent gains; keep the caller's point in that case
    // so the outer loop stays monotone.
    const double before = surrogate(F, positions, aux, scenario, weights);
    const double after = surrogate(F, projected, aux, scenario, weights);
    return after >= before ? projected : positions;
}

Eigen::VectorXd dga(const Eigen::VectorXd& positions, const Beamformer& F,
                    const AuxiliaryState& aux, const Scenario& scenario,
                    const Weights& weights, const ArrayGeometry& geometry,
                    const PositionOptConfig& cfg) {
    if (!is_feasible(positions, geometry))
        throw std::invalid_argument("dga: starting positions must be feasible");
    const auto value = [&](const Eigen::VectorXd& x) {
        return surrogate(F, x, aux, scenario, weights);
    };
    const auto grad = [&](const Eigen::VectorXd& x) {
        return surrogate_gradient(x, F, aux, scenario, weights);
    };
    return detail::dga_impl(positions, value, grad, geometry, cfg,
                            scenario.wavelength / 10.0);
}

} // namespace flexbeam
