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

#include "flexbeam/oracles.hpp"
#include "flexbeam/position_opt.hpp"
#include "support.hpp"

using namespace flexbeam;

namespace {

struct Instance {
    Scenario scenario;
    Eigen::VectorXd positions;
    Beamformer F;
    AuxiliaryState aux;
    Weights weights{0.5};
};

Instance make_instance(std::uint64_t seed, int n_ant = 4, int users = 2, int clutter = 1,
                       double x_max = 1.0) {
    Instance inst;
    inst.scenario = test::make_scenario(seed, n_ant, users, clutter, 5);
    Rng rng(seed + 5000);
    inst.positions = test::random_positions(rng, n_ant, 0.0, x_max, 0.05);
    inst.F = test::random_beamformer(rng, n_ant, users, 2.0);
    inst.aux = test::fixed_point_aux(inst.F, inst.positions, inst.scenario, inst.weights);
    return inst;
}

} // namespace

TEST_SUITE("position_opt") {

TEST_CASE("gradient vanishes when all auxiliaries are zero") {
    Instance inst = make_instance(201);
    inst.aux.xi_c.setZero();
    inst.aux.xi_s.setZero();
    const Eigen::VectorXd g = surrogate_gradient(inst.positions, inst.F, inst.aux,
                                                 inst.scenario, inst.weights);
    CHECK(g.norm() == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
    for (std::uint64_t seed : {211ull, 212ull, 213ull}) {
        const Instance inst = make_instance(seed, 4, 2, 1);
        const Eigen::VectorXd analytic = surrogate_gradient(
            inst.positions, inst.F, inst.aux, inst.scenario, inst.weights);
        const Eigen::VectorXd numeric = fd_gradient(
            [&](const Eigen::VectorXd& p) {
                return surrogate(inst.F, p, inst.aux, inst.scenario, inst.weights);
            },
            inst.positions);
        for (int n = 0; n < 4; ++n) {
            const double scale =
                std::max({std::abs(analytic[n]), std::abs(numeric[n]), 1e-10});
            CHECK(std::abs(analytic[n] - numeric[n]) / scale < 1e-5);
        }
    }
}

TEST_CASE("quadratic part of the gradient is translation invariant") {
    // single user, single path, no clutter, xi_s = 0: the quadratic term
    // |h^H f|^2 is invariant to a uniform shift, so its gradient sums to
    // zero. Averaging the gradients at +xi and -xi isolates that term (the
    // linear term flips sign, the quadratic one does not).
    Instance inst = make_instance(221, 4, 1, 0);
    inst.scenario.users[0].angles.conservativeResize(1);
    inst.scenario.users[0].gains.conservativeResize(1);
    inst.aux.xi_s.setZero();
    inst.aux.xi_c[0] = Complex{0.8, -0.4};

    Instance flipped = inst;
    flipped.aux.xi_c[0] = -inst.aux.xi_c[0];

    const Eigen::VectorXd plus = surrogate_gradient(inst.positions, inst.F, inst.aux,
                                                    inst.scenario, inst.weights);
    const Eigen::VectorXd minus = surrogate_gradient(
        flipped.positions, flipped.F, flipped.aux, flipped.scenario, flipped.weights);
    const double quadratic_sum = 0.5 * (plus + minus).sum();
    CHECK(std::abs(quadratic_sum) < 1e-8 * plus.cwiseAbs().maxCoeff());
}

TEST_CASE("grid search equals a brute-force replay of the sequential rule") {
    const Instance inst = make_instance(231, 3, 2, 1);
    ArrayGeometry geometry;
    geometry.x_min = 0.0;
    geometry.x_max = 1.0;
    geometry.d0 = 0.05;
    PositionOptConfig cfg;
    cfg.grid_step = 0.02;

    const Eigen::VectorXd fast = grid_init(inst.positions, inst.F, inst.aux,
                                           inst.scenario, inst.weights, geometry, cfg);

    // replay with plain surrogate evaluations
    Eigen::VectorXd x = inst.positions;
    std::vector<double> committed;
    for (int n = 0; n < 3; ++n) {
        double best = -1e300, best_g = 0.0;
        for (double g = 0.0; g <= 1.0 + 1e-12; g += 0.02) {
            const double gc = std::min(g, 1.0);
            bool ok = true;
            for (double c : committed)
                if (std::abs(gc - c) < 0.05 - 1e-12) ok = false;
            if (!ok) continue;
            Eigen::VectorXd probe = x;
            probe[n] = gc;
            const double value =
                surrogate(inst.F, probe, inst.aux, inst.scenario, inst.weights);
            if (value > best) {
                best = value;
                best_g = gc;
            }
        }
        x[n] = best_g;
        committed.push_back(best_g);
    }

    CHECK((fast - x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(is_feasible(fast, geometry));
}

TEST_CASE("grid search keeps committed antennas apart") {
    // force both antennas toward the same hot spot; the second must stay
    // at least d0 away from the first
    for (std::uint64_t seed : {241ull, 242ull, 243ull, 244ull}) {
        const Instance inst = make_instance(seed, 2, 1, 0);
        ArrayGeometry geometry;
        geometry.x_min = 0.0;
        geometry.x_max = 1.0;
        geometry.d0 = 0.05;
        PositionOptConfig cfg;
        const Eigen::VectorXd out = grid_init(inst.positions, inst.F, inst.aux,
                                              inst.scenario, inst.weights, geometry, cfg);
        CHECK(std::abs(out[0] - out[1]) >= 0.05 - 1e-12);
        CHECK(is_feasible(out, geometry));
    }
}

TEST_CASE("grid search validates its resolution") {
    const Instance inst = make_instance(245, 2, 1, 0);
    ArrayGeometry geometry;
    geometry.x_min = 0.0;
    geometry.x_max = 1.0;
    geometry.d0 = 0.05;
    PositionOptConfig cfg;
    cfg.grid_step = 0.6; // more than half the span
    CHECK_THROWS_AS(grid_init(inst.positions, inst.F, inst.aux, inst.scenario,
                              inst.weights, geometry, cfg),
                    std::invalid_argument);
}

TEST_CASE("coordinate ascent stays put at a stationary point") {
    Instance inst = make_instance(251);
    inst.aux.xi_c.setZero();
    inst.aux.xi_s.setZero(); // gradient is identically zero
    PositionOptConfig cfg;
    const Eigen::VectorXd out = coordinate_ascent(inst.positions, inst.F, inst.aux,
                                                  inst.scenario, inst.weights, cfg);
    CHECK(out == inst.positions);
}

TEST_CASE("coordinate ascent engine solves a quadratic stub") {
    const double center = 0.3137;
    const auto value = [&](const Eigen::VectorXd& x) {
        return -(x[0] - center) * (x[0] - center);
    };
    const auto grad = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(1);
        g[0] = -2.0 * (x[0] - center);
        return g;
    };
    PositionOptConfig cfg;
    cfg.initial_step = 0.5;
    cfg.ascent_tol = 1e-8;
    Eigen::VectorXd x0(1);
    x0 << -1.0;
    const Eigen::VectorXd out = detail::coordinate_ascent_impl(x0, value, grad, cfg, 0.5);
    CHECK(std::abs(out[0] - center) < cfg.ascent_tol);
}

TEST_CASE("coordinate ascent never decreases the surrogate") {
    for (std::uint64_t seed : {261ull, 262ull, 263ull}) {
        const Instance inst = make_instance(seed);
        PositionOptConfig cfg;
        const Eigen::VectorXd out = coordinate_ascent(inst.positions, inst.F, inst.aux,
                                                      inst.scenario, inst.weights, cfg);
        const double before =
            surrogate(inst.F, inst.positions, inst.aux, inst.scenario, inst.weights);
        const double after =
            surrogate(inst.F, out, inst.aux, inst.scenario, inst.weights);
        CHECK(after >= before - 1e-12);
    }
}

TEST_CASE("projection hand examples") {
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 0.5;
    g.d0 = 0.05;

    // already feasible: unchanged
    Eigen::VectorXd ok(3);
    ok << 0.1, 0.2, 0.45;
    CHECK(project_positions(ok, g).positions == ok);

    // cascade of lower clamps
    Eigen::VectorXd low(3);
    low << -0.1, 0.0, 0.02;
    const Eigen::VectorXd projected = project_positions(low, g).positions;
    CHECK(projected[0] == 0.0);
    CHECK(projected[1] == 0.0 + 0.05);
    CHECK(projected[2] == (0.0 + 0.05) + 0.05);
    CHECK(projected[1] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(projected[2] == doctest::Approx(0.10).epsilon(1e-15));

    // four coincident antennas fan out at spacing d0
    Eigen::VectorXd same = Eigen::VectorXd::Constant(4, 0.3);
    const Eigen::VectorXd fanned = project_positions(same, g).positions;
    CHECK(fanned[0] == 0.3);
    CHECK(fanned[1] == 0.3 + 0.05);
    CHECK(fanned[2] == (0.3 + 0.05) + 0.05);
    CHECK(fanned[3] == ((0.3 + 0.05) + 0.05) + 0.05);
    CHECK(fanned[3] == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("projection is idempotent, feasible and permutation-consistent") {
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.d0 = 0.05;
    Rng rng(271);

    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(6);
        for (int i = 0; i < 6; ++i) x[i] = rng.uniform(-0.5, 1.5);
        const ProjectionResult p = project_positions(x, g);
        CHECK(is_feasible(p.positions, g));
        CHECK(project_positions(p.positions, g).positions == p.positions);

        // the permutation maps sorted slots back to antenna indices, and the
        // clamped sorted sequence must be spaced by at least d0
        Eigen::VectorXd sorted(6);
        for (int m = 0; m < 6; ++m) sorted[m] = p.positions[p.permutation[m]];
        for (int m = 1; m < 6; ++m) CHECK(sorted[m] - sorted[m - 1] >= 0.05 - 1e-12);
        std::vector<int> seen(6, 0);
        for (int m = 0; m < 6; ++m) seen[p.permutation[m]]++;
        for (int m = 0; m < 6; ++m) CHECK(seen[m] == 1);
    }
}

TEST_CASE("projection rejects an overfull region") {
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 0.1;
    g.d0 = 0.05;
    Eigen::VectorXd x(4);
    x << 0.0, 0.02, 0.04, 0.06;
    CHECK_THROWS_AS(project_positions(x, g), InfeasibleError);
}

TEST_CASE("spga composes its stages and never loses to the input") {
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.d0 = 0.05;
    PositionOptConfig cfg;

    for (std::uint64_t seed : {281ull, 282ull, 283ull, 284ull}) {
        const Instance inst = make_instance(seed, 1, 2, 1);
        const Eigen::VectorXd out = spga(inst.positions, inst.F, inst.aux, inst.scenario,
                                         inst.weights, g, cfg);

        // post: best of {pipeline output, input} under the surrogate
        const Eigen::VectorXd staged = project_positions(
            coordinate_ascent(grid_init(inst.positions, inst.F, inst.aux, inst.scenario,
                                        inst.weights, g, cfg),
                              inst.F, inst.aux, inst.scenario, inst.weights, cfg),
            g)
                                           .positions;
        const double v_in =
            surrogate(inst.F, inst.positions, inst.aux, inst.scenario, inst.weights);
        const double v_staged =
            surrogate(inst.F, staged, inst.aux, inst.scenario, inst.weights);
        const Eigen::VectorXd expected = v_staged >= v_in ? staged : inst.positions;
        CHECK(out == expected);
        CHECK(is_feasible(out, g));
        const double v_out = surrogate(inst.F, out, inst.aux, inst.scenario, inst.weights);
        CHECK(v_out >= v_in - 1e-12);
    }
}

TEST_CASE("spga reaches nearly the exhaustive optimum on two antennas") {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Instance inst = make_instance(2900 + seed, 2, 2, 1);
        ArrayGeometry g;
        g.x_min = 0.0;
        g.x_max = 1.0;
        g.d0 = 0.05;
        PositionOptConfig cfg;
        const Eigen::VectorXd out = spga(inst.positions, inst.F, inst.aux, inst.scenario,
                                         inst.weights, g, cfg);
        const double achieved =
            surrogate(inst.F, out, inst.aux, inst.scenario, inst.weights);
        const ExhaustiveResult best = exhaustive_positions(
            inst.scenario, inst.F, inst.aux, inst.weights, g, inst.scenario.wavelength / 50.0);
        if (achieved >= 0.99 * best.value) ++good;
    }
    CHECK(good >= 4);
}

TEST_CASE("dga engine stops at an outward-pointing boundary") {
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.d0 = 0.05;
    PositionOptConfig cfg;
    cfg.initial_step = 0.1;

    // value keeps growing to the right; the antenna is already at x_max
    const auto value = [](const Eigen::VectorXd& x) { return x[0]; };
    const auto grad = [](const Eigen::VectorXd&) {
        Eigen::VectorXd g1(1);
        g1 << 1.0;
        return g1;
    };
    Eigen::VectorXd edge(1);
    edge << 1.0;
    CHECK(detail::dga_impl(edge, value, grad, g, cfg, 0.1) == edge);

    // zero gradient: nothing moves
    const auto flat = [](const Eigen::VectorXd&) { return 1.0; };
    const auto zero = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1).eval(); };
    Eigen::VectorXd mid(1);
    mid << 0.4;
    CHECK(detail::dga_impl(mid, flat, zero, g, cfg, 0.1) == mid);
}

TEST_CASE("dga requires a feasible start and preserves feasibility") {
    const Instance inst = make_instance(301, 4, 2, 1);
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.d0 = 0.05;
    PositionOptConfig cfg;

    Eigen::VectorXd bad(4);
    bad << 0.0, 0.01, 0.5, 0.9;
    CHECK_THROWS_AS(
        dga(bad, inst.F, inst.aux, inst.scenario, inst.weights, g, cfg),
        std::invalid_argument);

    const Eigen::VectorXd out = dga(inst.positions, inst.F, inst.aux, inst.scenario,
                                    inst.weights, g, cfg);
    CHECK(is_feasible(out, g));
    const double before =
        surrogate(inst.F, inst.positions, inst.aux, inst.scenario, inst.weights);
    const double after = surrogate(inst.F, out, inst.aux, inst.scenario, inst.weights);
    CHECK(after >= before - 1e-12);
}

TEST_CASE("dga rarely beats spga on matched instances") {
    int dga_not_better = 0;
    const int trials = 50;
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.d0 = 0.05;
    PositionOptConfig cfg;

    for (int t = 0; t < trials; ++t) {
        const Instance inst = make_instance(3100 + static_cast<std::uint64_t>(t), 4, 2, 1);
        const Eigen::VectorXd via_spga = spga(inst.positions, inst.F, inst.aux,
                                              inst.scenario, inst.weights, g, cfg);
        const Eigen::VectorXd via_dga = dga(inst.positions, inst.F, inst.aux,
                                            inst.scenario, inst.weights, g, cfg);
        const double s = surrogate(inst.F, via_spga, inst.aux, inst.scenario, inst.weights);
        const double d = surrogate(inst.F, via_dga, inst.aux, inst.scenario, inst.weights);
        if (d <= s + 1e-9) ++dga_not_better;
    }
    CHECK(dga_not_better >= 45); // >= 90%
}

TEST_CASE("max feasible step stops exactly at the first constraint") {
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.d0 = 0.05;
    Rng rng(321);

    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::VectorXd x = test::random_positions(rng, 4, 0.0, 1.0, 0.06);
        Eigen::VectorXd dir(4);
        for (int i = 0; i < 4; ++i) dir[i] = rng.uniform(-1.0, 1.0);
        const double alpha = detail::max_feasible_step(x, dir, g);
        if (!std::isfinite(alpha)) continue; // direction never hits a constraint
        CHECK(is_feasible((x + (1.0 - 1e-9) * alpha * dir).eval(), g));
        if (alpha > 1e-9)
            CHECK(is_feasible((x + 0.5 * alpha * dir).eval(), g));
        CHECK_FALSE(is_feasible((x + (alpha + 1e-6) * dir).eval(), g));
    }
}

} // TEST_SUITE
