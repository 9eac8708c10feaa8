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

#include "flexbeam/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace flexbeam {

std::string_view to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::SpgaFbfMa: return "SPGA_FBF_MA";
        case Algorithm::DgaFbfMa: return "DGA_FBF_MA";
        case Algorithm::BfFpa: return "BF_FPA";
    }
    throw std::invalid_argument("to_string: unknown algorithm");
}

Algorithm algorithm_from_string(std::string_view name) {
    if (name == "SPGA_FBF_MA") return Algorithm::SpgaFbfMa;
    if (name == "DGA_FBF_MA") return Algorithm::DgaFbfMa;
    if (name == "BF_FPA") return Algorithm::BfFpa;
    throw std::invalid_argument("algorithm_from_string: unknown algorithm '" +
                                std::string(name) + "'");
}

namespace {

// Iterate the closed-form auxiliary updates to their joint fixed point, at
// which the surrogate is tight (mu lands on the SINR/SCNR values). Keeping
// the iterates tight makes the recorded trajectory the true objective, so
// the beamformer-refitting position search below stays provably monotone.
void tighten_aux(AuxiliaryState& aux, const Beamformer& F, const Eigen::VectorXd& x,
                 const Scenario& scenario, const Weights& weights) {
    for (int round = 0; round < 60; ++round) {
        const Eigen::VectorXd mu = update_mu(F, x, aux, scenario, weights);
        const XiUpdate xi = update_xi(F, x, mu, scenario, weights);
        const double change = (mu - aux.mu).cwiseAbs().maxCoeff() /
                              std::max(1.0, mu.cwiseAbs().maxCoeff());
        aux.mu = mu;
        aux.xi_c = xi.xi_c;
        aux.xi_s = xi.xi_s;
        if (change < 1e-13) break;
    }
}

// Channels and steering vectors synthesized once for one candidate layout.
struct LayoutChannels {
    std::vector<Eigen::VectorXcd> h;   // user channels
    Eigen::VectorXcd a_s;              // target steering
    std::vector<Eigen::VectorXcd> a_c; // clutter steering

    static LayoutChannels at(const Scenario& scenario, const Eigen::VectorXd& x) {
        LayoutChannels ch;
        ch.h.reserve(static_cast<size_t>(scenario.num_users()));
        for (int k = 0; k < scenario.num_users(); ++k)
            ch.h.push_back(user_channel(scenario, k, x));
        ch.a_s = steering_vector(x, scenario.target_angle, scenario.wavelength);
        ch.a_c.reserve(static_cast<size_t>(scenario.num_clutter()));
        for (int c = 0; c < scenario.num_clutter(); ++c)
            ch.a_c.push_back(
                steering_vector(x, scenario.clutter_angles[c], scenario.wavelength));
        return ch;
    }
};

// One-step-ahead score of a candidate layout: tighten the auxiliaries at the
// current beamformer, refit the beamformer through the KKT update, and report
// the true objective. The fixed-auxiliary surrogate that drives the SPGA
// stages is tight only near the current layout and cannot rank distant
// candidates; this re-tightened score is what lets the search stage actually
// exploit the moving region.
class LookaheadScorer {
  public:
    LookaheadScorer(const Scenario& scenario, const Weights& weights, double power_budget,
                    BisectionConfig bisection, const Beamformer& reference, int depth = 1)
        : scenario_(scenario), weights_(weights), power_budget_(power_budget),
          bisection_(bisection), reference_(reference), depth_(depth) {}

    double score(const Eigen::VectorXd& x, Beamformer* refit) const {
        const LayoutChannels ch = LayoutChannels::at(scenario_, x);
        Beamformer F = reference_;
        for (int step = 0; step < depth_; ++step)
            F = refit_beamformer(ch, F);
        const double value = evaluate(ch, F);
        if (refit) *refit = std::move(F);
        return value;
    }

  private:
    // KKT beamformer response to the auxiliaries tightened at (F, x).
    Beamformer refit_beamformer(const LayoutChannels& ch, const Beamformer& F) const {
        const int num_users = scenario_.num_users();
        const int num_cols = num_users + 1;
        const double wc = weights_.comm;
        const double ws = weights_.sense();

        Eigen::VectorXd mu(num_cols);
        Eigen::VectorXcd xi_c(num_users);
        for (int k = 0; k < num_users; ++k) {
            const Eigen::VectorXcd r = (ch.h[static_cast<size_t>(k)].adjoint() * F)
                                           .transpose();
            const double total = r.squaredNorm() + scenario_.user_noise[k];
            const double own = std::norm(r[k]);
            mu[k] = own / (total - own);
            xi_c[k] = std::sqrt(1.0 + mu[k]) * std::conj(r[k]) / total;
        }
        const Eigen::VectorXcd target_row =
            scenario_.target_gain * (ch.a_s.adjoint() * F).transpose();
        double clutter_power = 0.0;
        for (int c = 0; c < scenario_.num_clutter(); ++c)
            clutter_power += (scenario_.clutter_gains[c] *
                              (ch.a_c[static_cast<size_t>(c)].adjoint() * F).transpose())
                                 .squaredNorm();
        const double target_power = target_row.squaredNorm();
        const double radar_denom = clutter_power + target_power + scenario_.sensing_noise;
        const double mu_s = target_power / (clutter_power + scenario_.sensing_noise);
        mu[num_users] = mu_s;
        const Eigen::VectorXcd xi_s =
            std::sqrt(1.0 + mu_s) * target_row.conjugate() / radar_denom;

        const Eigen::Index n_ant = ch.a_s.size();
        QuadraticForm qf;
        qf.lambda_matrix = Eigen::MatrixXcd::Zero(n_ant, n_ant);
        qf.phi = Eigen::MatrixXcd::Zero(n_ant, num_cols);
        for (int k = 0; k < num_users; ++k) {
            const Eigen::VectorXcd& hk = ch.h[static_cast<size_t>(k)];
            qf.lambda_matrix += wc * std::norm(xi_c[k]) * (hk * hk.adjoint());
            qf.phi.col(k) = wc * std::sqrt(1.0 + mu[k]) * std::conj(xi_c[k]) * hk;
        }
        Eigen::MatrixXcd radar =
            std::norm(scenario_.target_gain) * (ch.a_s * ch.a_s.adjoint());
        for (int c = 0; c < scenario_.num_clutter(); ++c) {
            const Eigen::VectorXcd& ac = ch.a_c[static_cast<size_t>(c)];
            radar += std::norm(scenario_.clutter_gains[c]) * (ac * ac.adjoint());
        }
        qf.lambda_matrix += ws * xi_s.squaredNorm() * radar;
        const Complex sense_scale =
            ws * std::sqrt(1.0 + mu_s) * std::conj(scenario_.target_gain);
        for (int k = 0; k < num_cols; ++k)
            qf.phi.col(k) += sense_scale * std::conj(xi_s[k]) * ch.a_s;

        return beamformer_update(qf, power_budget_, bisection_).F;
    }

    // true objective from cached channels
    double evaluate(const LayoutChannels& ch, const Beamformer& F) const {
        const int num_users = scenario_.num_users();
        double value = 0.0;
        for (int k = 0; k < num_users; ++k) {
            const Eigen::VectorXcd r = (ch.h[static_cast<size_t>(k)].adjoint() * F)
                                           .transpose();
            const double own = std::norm(r[k]);
            const double rest = r.squaredNorm() - own + scenario_.user_noise[k];
            value += weights_.comm * std::log2(1.0 + own / rest);
        }
        const double target2 =
            (scenario_.target_gain * (ch.a_s.adjoint() * F).transpose()).squaredNorm();
        double clutter2 = 0.0;
        for (int c = 0; c < scenario_.num_clutter(); ++c)
            clutter2 += (scenario_.clutter_gains[c] *
                         (ch.a_c[static_cast<size_t>(c)].adjoint() * F).transpose())
                            .squaredNorm();
        value += weights_.sense() *
                 std::log2(1.0 + target2 / (clutter2 + scenario_.sensing_noise));
        return value;
    }

    const Scenario& scenario_;
    const Weights& weights_;
    double power_budget_;
    BisectionConfig bisection_;
    const Beamformer& reference_;
    int depth_;
};

struct SearchedPoint {
    Eigen::VectorXd positions;
    Beamformer F;
    double value = 0.0;
};

void consider(const Eigen::VectorXd& x, const LookaheadScorer& scorer, SearchedPoint& best) {
    Beamformer refit;
    const double value = scorer.score(x, &refit);
    if (value > best.value) {
        best.value = value;
        best.F = std::move(refit);
        best.positions = x;
    }
}

std::vector<double> search_grid(const ArrayGeometry& geometry, double step) {
    const auto count = static_cast<Eigen::Index>(
                           std::floor((geometry.x_max - geometry.x_min) / step + 1e-9)) +
                       1;
    std::vector<double> grid(static_cast<size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i)
        grid[static_cast<size_t>(i)] =
            std::min(geometry.x_min + static_cast<double>(i) * step, geometry.x_max);
    return grid;
}

// Uniformly dilated and shifted arrays. Sampling this two-parameter family
// once gives the per-antenna sweep a globally informed start; single-antenna
// moves alone cannot reach a coordinated re-spacing of the whole array.
void probe_dilations(const LookaheadScorer& scorer, const ArrayGeometry& geometry,
                     double wavelength, Eigen::Index n_ant, SearchedPoint& best) {
    const double span = geometry.x_max - geometry.x_min;
    const double max_spacing = n_ant > 1 ? span / static_cast<double>(n_ant - 1) : span;
    Eigen::VectorXd x(n_ant);
    for (double spacing = geometry.d0; spacing <= max_spacing + 1e-12;
         spacing += wavelength / 10.0) {
        const double reach = spacing * static_cast<double>(n_ant - 1);
        for (double offset = geometry.x_min; offset + reach <= geometry.x_max + 1e-12;
             offset += wavelength / 2.0) {
            for (Eigen::Index n = 0; n < n_ant; ++n)
                x[n] = std::min(offset + spacing * static_cast<double>(n), geometry.x_max);
            consider(x, scorer, best);
        }
    }
}

// Gauss-Seidel grid sweeps over single antennas, with a parabolic sub-grid
// polish around each committed point. Feasibility against all other antennas
// is kept at every step and the incumbent coordinate always competes, so the
// score never decreases.
void sweep_antennas(const LookaheadScorer& scorer, const ArrayGeometry& geometry,
                    double grid_step, int max_sweeps, SearchedPoint& best) {
    const std::vector<double> grid = search_grid(geometry, grid_step);
    const Eigen::Index n_ant = best.positions.size();
    Eigen::VectorXd probe = best.positions;

    const auto admissible = [&](double g, Eigen::Index n) {
        if (g < geometry.x_min || g > geometry.x_max) return false;
        for (Eigen::Index m = 0; m < n_ant; ++m)
            if (m != n && std::abs(g - best.positions[m]) < geometry.d0 - 1e-12)
                return false;
        return true;
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool moved = false;
        for (Eigen::Index n = 0; n < n_ant; ++n) {
            const double incumbent = best.positions[n];
            for (double g : grid) {
                if (!admissible(g, n)) continue;
                probe = best.positions;
                probe[n] = g;
                Beamformer refit;
                const double value = scorer.score(probe, &refit);
                if (value > best.value) {
                    best.value = value;
                    best.F = std::move(refit);
                    best.positions[n] = g;
                }
            }

            // parabolic polish between grid points
            const double center = best.positions[n];
            const double delta = grid_step / 2.0;
            if (admissible(center - delta, n) && admissible(center + delta, n)) {
                probe = best.positions;
                probe[n] = center - delta;
                const double left = scorer.score(probe, nullptr);
                probe[n] = center + delta;
                const double right = scorer.score(probe, nullptr);
                const double curvature = left - 2.0 * best.value + right;
                if (curvature < 0.0) {
                    const double vertex =
                        center + 0.5 * delta * (left - right) / curvature;
                    if (admissible(vertex, n)) {
                        probe[n] = vertex;
                        consider(probe, scorer, best);
                    }
                }
            }
            if (best.positions[n] != incumbent) moved = true;
        }
        if (!moved) break;
    }
}

} // namespace

InitialState initialize(const Scenario& scenario, const ArrayGeometry& geometry,
                        const SolverConfig& cfg) {
    const int n_ant = scenario.num_antennas;
    const int num_users = scenario.num_users();
    const double spacing = scenario.wavelength / 2.0;

    if (geometry.x_min + (n_ant - 1) * spacing > geometry.x_max + 1e-12)
        throw InfeasibleError("initialize: half-wavelength ULA exceeds the region");
    if (spacing < geometry.d0 - 1e-12)
        throw InfeasibleError("initialize: half-wavelength ULA violates the min spacing");

    InitialState state;
    state.positions.resize(n_ant);
    for (int n = 0; n < n_ant; ++n)
        state.positions[n] = geometry.x_min + n * spacing;

    // Matched-filter columns at equal per-column power summing to P0.
    const double col_power = cfg.power_budget / (num_users + 1);
    state.F.resize(n_ant, num_users + 1);
    for (int k = 0; k <= num_users; ++k) {
        Eigen::VectorXcd dir =
            k < num_users
                ? user_channel(scenario, k, state.positions)
                : steering_vector(state.positions, scenario.target_angle,
                                  scenario.wavelength)
                      .eval();
        const double norm = dir.norm();
        if (norm > 0.0) {
            state.F.col(k) = std::sqrt(col_power) / norm * dir;
        } else {
            // Degenerate all-zero channel: fall back to a single element.
            state.F.col(k).setZero();
            state.F(k % n_ant, k) = std::sqrt(col_power);
        }
    }

    // Auxiliaries at their fixed point for (F0, x0), which makes the first
    // surrogate value tight.
    state.aux.mu.resize(num_users + 1);
    for (int k = 0; k < num_users; ++k)
        state.aux.mu[k] = sinr(k, state.F, scenario, state.positions);
    state.aux.mu[num_users] = scnr(state.F, scenario, state.positions);
    const XiUpdate xi = update_xi(state.F, state.positions, state.aux.mu, scenario,
                                  cfg.weights);
    state.aux.xi_c = xi.xi_c;
    state.aux.xi_s = xi.xi_s;
    return state;
}

SolveResult solve(const Scenario& scenario, const ArrayGeometry& geometry,
                  const SolverConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();

    InitialState state = initialize(scenario, geometry, cfg);
    Beamformer F = std::move(state.F);
    Eigen::VectorXd x = std::move(state.positions);
    AuxiliaryState aux = std::move(state.aux);

    const double grid_step = cfg.position.grid_step > 0.0 ? cfg.position.grid_step
                                                          : scenario.wavelength / 20.0;

    SolveResult result;
    result.surrogate_trajectory.push_back(surrogate(F, x, aux, scenario, cfg.weights));
    result.objective_trajectory.push_back(objective(F, x, scenario, cfg.weights));

    int iterations = 0;
    for (int t = 1; t <= cfg.outer_max_iters; ++t) {
        try {
            const QuadraticForm qf = assemble_quadratic_form(scenario, x, aux, cfg.weights);
            F = beamformer_update(qf, cfg.power_budget, cfg.bisection).F;

            if (cfg.algorithm == Algorithm::SpgaFbfMa) {
                const Eigen::VectorXd proposed =
                    spga(x, F, aux, scenario, cfg.weights, geometry, cfg.position);

                // Scoring runs a relaxed dual search; the adopted layout is
                // refit at full precision below.
                BisectionConfig scoring = cfg.bisection;
                if (scoring.tolerance <= 0.0)
                    scoring.tolerance = 1e-5 * cfg.power_budget;
                const LookaheadScorer scorer(scenario, cfg.weights, cfg.power_budget,
                                             scoring, F);
                SearchedPoint best;
                best.positions = proposed;
                best.value = scorer.score(proposed, &best.F);
                if (t == 1)
                    probe_dilations(scorer, geometry, scenario.wavelength,
                                    x.size(), best);
                sweep_antennas(scorer, geometry, grid_step, 3, best);

                // Monotonicity safeguard on the tight (true-objective) value;
                // the winning layout is re-scored at full dual precision and
                // adopted only if it still clears the baseline.
                const double baseline = objective(F, x, scenario, cfg.weights);
                if (best.value >= baseline) {
                    const LookaheadScorer full(scenario, cfg.weights, cfg.power_budget,
                                               cfg.bisection, F);
                    Beamformer refit;
                    if (full.score(best.positions, &refit) >= baseline) {
                        x = best.positions;
                        F = std::move(refit);
                    }
                }
            } else if (cfg.algorithm == Algorithm::DgaFbfMa) {
                const Eigen::VectorXd proposed =
                    dga(x, F, aux, scenario, cfg.weights, geometry, cfg.position);
                if (objective(F, proposed, scenario, cfg.weights) >=
                    objective(F, x, scenario, cfg.weights))
                    x = proposed;
            }

            tighten_aux(aux, F, x, scenario, cfg.weights);
        } catch (const std::exception& e) {
            throw std::runtime_error("solve: outer iteration " + std::to_string(t) +
                                     ": " + e.what());
        }

        iterations = t;
        const double value = surrogate(F, x, aux, scenario, cfg.weights);
        const double previous = result.surrogate_trajectory.back();
        result.surrogate_trajectory.push_back(value);
        result.objective_trajectory.push_back(objective(F, x, scenario, cfg.weights));

        const double rel_change =
            std::abs(value - previous) / std::max(std::abs(previous), 1e-12);
        if (rel_change < cfg.outer_tol) break;
    }

    result.F = std::move(F);
    result.positions = std::move(x);
    result.metrics = report(result.F, result.positions, scenario, cfg.weights);
    result.iterations = iterations;
    result.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return result;
}

} // namespace flexbeam
