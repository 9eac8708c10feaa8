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
#include "support.hpp"

using namespace flexbeam;

TEST_SUITE("oracles") {

TEST_CASE("finite differences on polynomials and constants") {
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;

    const Eigen::VectorXd g = fd_gradient(
        [](const Eigen::VectorXd& p) { return p.squaredNorm(); }, x);
    CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-6));

    const Eigen::VectorXd zero =
        fd_gradient([](const Eigen::VectorXd&) { return 42.0; }, x);
    CHECK(zero.norm() == 0.0);
}

TEST_CASE("exhaustive search equals a direct table maximum for one antenna") {
    const Scenario sc = test::make_scenario(501, 1, 1, 1, 3);
    Rng rng(502);
    const Beamformer F = test::random_beamformer(rng, 1, 1);
    Eigen::VectorXd x0(1);
    x0 << 0.2;
    const AuxiliaryState aux = test::fixed_point_aux(F, x0, sc, Weights{0.5});

    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 0.5;
    g.d0 = 0.05;
    const double step = 0.01;
    const ExhaustiveResult best =
        exhaustive_positions(sc, F, aux, Weights{0.5}, g, step);

    double table_best = -1e300;
    double table_arg = 0.0;
    for (double p = 0.0; p <= 0.5 + 1e-12; p += step) {
        Eigen::VectorXd probe(1);
        probe << std::min(p, 0.5);
        const double value = surrogate(F, probe, aux, sc, Weights{0.5});
        if (value > table_best) {
            table_best = value;
            table_arg = probe[0];
        }
    }
    CHECK(best.value == table_best);
    CHECK(best.positions[0] == table_arg);
}

TEST_CASE("exhaustive search respects the spacing constraint edge") {
    const Scenario sc = test::make_scenario(511, 2, 1, 0, 2);
    Rng rng(512);
    const Beamformer F = test::random_beamformer(rng, 2, 1);
    Eigen::VectorXd x0(2);
    x0 << 0.0, 0.4;
    const AuxiliaryState aux = test::fixed_point_aux(F, x0, sc, Weights{0.5});

    // spacing equal to the span: only the two extreme tuples survive
    ArrayGeometry g;
    g.x_min = 0.0;
    g.x_max = 0.4;
    g.d0 = 0.4;
    const ExhaustiveResult best = exhaustive_positions(sc, F, aux, Weights{0.5}, g, 0.1);
    CHECK(std::abs(best.positions[0] - best.positions[1]) >= 0.4 - 1e-12);

    // spacing beyond the span: nothing is feasible
    g.d0 = 0.6;
    CHECK_THROWS_AS(exhaustive_positions(sc, F, aux, Weights{0.5}, g, 0.1),
                    InfeasibleError);

    // more than two antennas are rejected
    const Scenario big = test::make_scenario(513, 3, 1, 0, 2);
    const Beamformer F3 = test::random_beamformer(rng, 3, 1);
    CHECK_THROWS_AS(exhaustive_positions(big, F3, aux, Weights{0.5}, g, 0.1),
                    std::invalid_argument);
}

TEST_CASE("numeric maximizer reproduces the closed-form auxiliaries") {
    for (std::uint64_t seed : {521ull, 522ull, 523ull}) {
        const Scenario sc = test::make_scenario(seed, 3, 2, 1, 4);
        Rng rng(seed + 9000);
        const Eigen::VectorXd x = test::random_positions(rng, 3, 0.0, 1.0, 0.0);
        const Beamformer F = test::random_beamformer(rng, 3, 2, 2.0);
        const Weights w{0.5};

        const AuxiliaryState closed = test::fixed_point_aux(F, x, sc, w);
        const AuxiliaryState numeric = numeric_aux_maximizer(F, x, sc, w);

        for (int i = 0; i < 3; ++i)
            CHECK(numeric.mu[i] ==
                  doctest::Approx(closed.mu[i]).epsilon(1e-6).scale(1.0));
        for (int i = 0; i < 2; ++i)
            CHECK(std::abs(numeric.xi_c[i] - closed.xi_c[i]) < 1e-6);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(numeric.xi_s[i] - closed.xi_s[i]) < 1e-6);
    }
}

TEST_CASE("numeric maximizer on degenerate inputs") {
    const Scenario sc = test::make_scenario(531, 2, 1, 0, 2);
    Eigen::VectorXd x(2);
    x << 0.0, 0.3;

    const AuxiliaryState aux =
        numeric_aux_maximizer(Beamformer::Zero(2, 2), x, sc, Weights{0.5});
    CHECK(aux.mu.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(aux.xi_c.norm() < 1e-6);
    CHECK(aux.xi_s.norm() < 1e-6);
}

TEST_CASE("numeric maximizer recovers the scalar closed form") {
    // h = 1, f = [1, 0], sigma^2 = 1: the communication auxiliary peaks at
    // xi = sqrt(1 + mu) / 2 with mu = SINR = 1, i.e. sqrt(2)/2
    Scenario scalar;
    scalar.wavelength = 0.1;
    scalar.num_antennas = 1;
    PathCluster cluster;
    cluster.angles = Eigen::VectorXd::Constant(1, 0.9);
    cluster.gains = Eigen::VectorXcd::Constant(1, Complex{1.0, 0.0});
    scalar.users.push_back(cluster);
    scalar.user_noise = Eigen::VectorXd::Ones(1);
    scalar.target_angle = M_PI / 3.0;
    scalar.target_gain = 0.0;
    scalar.sensing_noise = 1.0;

    Eigen::VectorXd origin(1);
    origin << 0.0;
    Beamformer F(1, 2);
    F(0, 0) = 1.0;
    F(0, 1) = 0.0;

    const AuxiliaryState numeric =
        numeric_aux_maximizer(F, origin, scalar, Weights{0.5});
    const AuxiliaryState closed = test::fixed_point_aux(F, origin, scalar, Weights{0.5});
    CHECK(std::abs(numeric.xi_c[0] - closed.xi_c[0]) < 1e-6);
    CHECK(numeric.mu[0] == doctest::Approx(1.0).epsilon(1e-6));

    // and at mu fixed to zero the plain 0.5 value appears
    const XiUpdate xi =
        update_xi(F, origin, Eigen::VectorXd::Zero(2), scalar, Weights{0.5});
    CHECK(std::abs(xi.xi_c[0] - Complex{0.5, 0.0}) < 1e-12);
}

} // TEST_SUITE
