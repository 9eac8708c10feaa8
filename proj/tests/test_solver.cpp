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

#include <doctest.h>

#include "flexbeam/solver.hpp"
#include "support.hpp"

using namespace flexbeam;

namespace {

ArrayGeometry default_region() {
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.d0 = 0.05;
    return g;
}

} // namespace

TEST_SUITE("solver") {

TEST_CASE("algorithm names round trip") {
    for (Algorithm a : {Algorithm::SpgaFbfMa, Algorithm::DgaFbfMa, Algorithm::BfFpa})
        CHECK(algorithm_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(algorithm_from_string("GRADIENT_DESCENT"), std::invalid_argument);
}

TEST_CASE("initialization builds the half-wavelength array at full power") {
    const Scenario sc = test::make_scenario(401, 4, 4, 3, 13);
    SolverConfig cfg;
    cfg.power_budget = 2.5;

    const InitialState st = initialize(sc, default_region(), cfg);
    Eigen::VectorXd expected(4);
    for (int n = 0; n < 4; ++n) expected[n] = n * (sc.wavelength / 2.0);
    CHECK(st.positions == expected);
    for (int n = 0; n < 4; ++n)
        CHECK(st.positions[n] == doctest::Approx(0.05 * n).epsilon(1e-12));
    CHECK(st.F.squaredNorm() == doctest::Approx(2.5).epsilon(1e-12));

    // columns carry equal power
    for (int c = 0; c < st.F.cols(); ++c)
        CHECK(st.F.col(c).squaredNorm() == doctest::Approx(0.5).epsilon(1e-12));

    // the initial SINR matches a direct formula evaluation
    for (int k = 0; k < 4; ++k) {
        const Eigen::VectorXcd h = user_channel(sc, k, st.positions);
        double interference = sc.user_noise[k];
        for (int j = 0; j < st.F.cols(); ++j)
            if (j != k) interference += std::norm((h.adjoint() * st.F.col(j)).value());
        const double direct =
            std::norm((h.adjoint() * st.F.col(k)).value()) / interference;
        CHECK(sinr(k, st.F, sc, st.positions) == doctest::Approx(direct).epsilon(1e-12));
        CHECK(st.aux.mu[k] == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("initialization rejects regions the array cannot fit") {
    const Scenario sc = test::make_scenario(402, 4, 2, 0, 3);
    SolverConfig cfg;

    ArrayGeometry tight = default_region();
    tight.x_max = 0.12; // ULA needs 0.15
    CHECK_THROWS_AS(initialize(sc, tight, cfg), InfeasibleError);

    ArrayGeometry wide_spacing = default_region();
    wide_spacing.d0 = 0.08; // ULA spacing is only 0.05
    CHECK_THROWS_AS(initialize(sc, wide_spacing, cfg), InfeasibleError);
}

TEST_CASE("single interference-free user converges to matched filtering") {
    ScenarioParams params;
    params.num_antennas = 2;
    params.num_users = 1;
    params.num_clutter = 0;
    params.num_paths = 1; // line of sight
    const Scenario sc = generate_scenario(411, params);

    SolverConfig cfg;
    cfg.power_budget = 1.0;
    cfg.weights = Weights{1.0}; // communication only
    cfg.algorithm = Algorithm::BfFpa;

    const SolveResult r = solve(sc, default_region(), cfg);
    const Eigen::VectorXcd h = user_channel(sc, 0, r.positions);
    const double aligned = std::abs((h.adjoint() * r.F.col(0)).value());
    CHECK(aligned == doctest::Approx(h.norm() * r.F.col(0).norm()).epsilon(1e-6));
    CHECK(r.F.squaredNorm() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("a single movable antenna solves cleanly") {
    const Scenario sc = test::make_scenario(425, 1, 1, 1, 3);
    SolverConfig cfg;
    cfg.power_budget = 1.0;
    const SolveResult r = solve(sc, default_region(), cfg);
    CHECK(std::isfinite(r.metrics.objective_bits));
    CHECK(r.metrics.objective_bits >= 0.0);
    CHECK(r.positions.size() == 1);
    CHECK(is_feasible(r.positions, default_region()));
}

TEST_CASE("vanishing power budget yields a vanishing objective") {
    const Scenario sc = test::make_scenario(421, 4, 4, 3, 13);
    SolverConfig cfg;
    cfg.power_budget = 1e-12;
    cfg.algorithm = Algorithm::BfFpa;
    const SolveResult r = solve(sc, default_region(), cfg);
    CHECK(r.metrics.objective_bits < 1e-9);
}

TEST_CASE("movable antennas never lose to the fixed array on a matched seed") {
    const Scenario sc = test::make_scenario(431, 4, 4, 3, 13);
    SolverConfig cfg;
    cfg.power_budget = 1.0;

    SolverConfig fpa = cfg;
    fpa.algorithm = Algorithm::BfFpa;
    const double movable = solve(sc, default_region(), cfg).metrics.objective_bits;
    const double fixed = solve(sc, default_region(), fpa).metrics.objective_bits;
    CHECK(movable >= fixed - 1e-9);
}

TEST_CASE("surrogate trajectories are nondecreasing for every algorithm") {
    for (auto algorithm :
         {Algorithm::SpgaFbfMa, Algorithm::DgaFbfMa, Algorithm::BfFpa}) {
        const Scenario sc = test::make_scenario(441, 4, 4, 3, 13);
        SolverConfig cfg;
        cfg.power_budget = 1.0;
        cfg.algorithm = algorithm;
        const SolveResult r = solve(sc, default_region(), cfg);
        REQUIRE(r.surrogate_trajectory.size() >= 2);
        for (size_t i = 1; i < r.surrogate_trajectory.size(); ++i)
            CHECK(r.surrogate_trajectory[i] >= r.surrogate_trajectory[i - 1] - 1e-9);
        CHECK(static_cast<int>(r.surrogate_trajectory.size()) == r.iterations + 1);
        CHECK(r.objective_trajectory.size() == r.surrogate_trajectory.size());
        CHECK(is_feasible(r.positions, default_region()));
        CHECK(r.F.squaredNorm() <= 1.0 + 1e-7);
    }
}

TEST_CASE("fixed-array baseline never moves the antennas") {
    const Scenario sc = test::make_scenario(451, 4, 4, 3, 13);
    SolverConfig cfg;
    cfg.power_budget = 1.0;
    cfg.algorithm = Algorithm::BfFpa;
    const SolveResult r = solve(sc, default_region(), cfg);
    Eigen::VectorXd ula(4);
    for (int n = 0; n < 4; ++n) ula[n] = n * (sc.wavelength / 2.0);
    CHECK(r.positions == ula);
}

TEST_CASE("solving twice produces identical trajectories") {
    const Scenario sc = test::make_scenario(461, 4, 4, 3, 13);
    SolverConfig cfg;
    cfg.power_budget = 1.0;
    const SolveResult a = solve(sc, default_region(), cfg);
    const SolveResult b = solve(sc, default_region(), cfg);
    CHECK(a.surrogate_trajectory == b.surrogate_trajectory);
    CHECK(a.objective_trajectory == b.objective_trajectory);
    CHECK(a.positions == b.positions);
    CHECK(a.F == b.F);
}

TEST_CASE("the stop rule leaves only a small residual step") {
    const Scenario sc = test::make_scenario(471, 4, 4, 3, 13);
    SolverConfig cfg;
    cfg.power_budget = 1.0;
    cfg.algorithm = Algorithm::BfFpa;
    const SolveResult r = solve(sc, default_region(), cfg);
    REQUIRE(r.iterations < cfg.outer_max_iters); // converged, not exhausted

    // replay one more F + aux round by hand
    const Weights w = cfg.weights;
    AuxiliaryState aux = test::fixed_point_aux(r.F, r.positions, sc, w);
    const QuadraticForm qf = assemble_quadratic_form(sc, r.positions, aux, w);
    const Beamformer F2 = beamformer_update(qf, cfg.power_budget).F;
    const AuxiliaryState aux2 = test::fixed_point_aux(F2, r.positions, sc, w);

    const double before = r.surrogate_trajectory.back();
    const double after = surrogate(F2, r.positions, aux2, sc, w);
    CHECK(std::abs(after - before) < 10.0 * cfg.outer_tol * std::abs(before));
}

TEST_CASE("solve errors carry the iteration index") {
    Scenario sc = test::make_scenario(481, 4, 1, 0, 2);
    SolverConfig cfg;
    cfg.power_budget = 1e-6; // guarantees an active constraint
    cfg.algorithm = Algorithm::BfFpa;
    cfg.bisection.max_iters = 0; // forces a convergence failure inside iteration 1
    try {
        solve(sc, default_region(), cfg);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("outer iteration 1") != std::string::npos);
    }
}

} // TEST_SUITE
