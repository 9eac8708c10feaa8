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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "flexbeam/harness.hpp"
#include "flexbeam/oracles.hpp"
#include "flexbeam/rng.hpp"

namespace {

using namespace flexbeam;

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::string algorithm = "SPGA_FBF_MA";
    std::uint64_t master_seed = 0;
    int num_seeds = 0;
    bool seed_set = false;
    bool seeds_set = false;
    bool out_set = false;
    bool print_config = false;
};

ExperimentConfig load_config(const CliOptions& opt) {
    ExperimentConfig cfg;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in)
            throw std::invalid_argument("cannot open config file '" + opt.config_path + "'");
        std::ostringstream text;
        text << in.rdbuf();
        cfg = config_from_json_text(text.str());
    }
    if (opt.seed_set) cfg.master_seed = opt.master_seed;
    if (opt.seeds_set) cfg.num_seeds = opt.num_seeds;
    if (opt.out_set) cfg.output_path = opt.out_path;
    return cfg;
}

std::vector<double> arange(double first, double last, double step) {
    std::vector<double> values;
    for (double v = first; v <= last + 1e-9; v += step) values.push_back(v);
    return values;
}

int run_single(const CliOptions& opt) {
    ExperimentConfig cfg = load_config(opt);
    if (opt.print_config) {
        std::cout << config_to_json_text(cfg) << "\n";
        return 0;
    }
    const int n = cfg.n_antennas.front();
    const Scenario scenario =
        generate_scenario(derive_stream(cfg.master_seed, 0), scenario_params_for(cfg, n));
    const ArrayGeometry geometry = geometry_for(cfg, cfg.x_max_lambda);
    SolverConfig solver_cfg;
    solver_cfg.power_budget = dbm_to_watts(cfg.power_dbm);
    solver_cfg.weights.comm = cfg.comm_weight;
    solver_cfg.outer_tol = cfg.outer_tol;
    solver_cfg.outer_max_iters = cfg.outer_max_iters;
    solver_cfg.algorithm = algorithm_from_string(opt.algorithm);

    const SolveResult result = solve(scenario, geometry, solver_cfg);
    const MetricsReport& m = result.metrics;

    std::printf("algorithm        : %s\n", opt.algorithm.c_str());
    std::printf("antennas         : %d, region [%.4g, %.4g] m, d0 %.4g m\n", n,
                geometry.x_min, geometry.x_max, geometry.d0);
    std::printf("power budget     : %.6g W (%.4g dBm)\n", solver_cfg.power_budget,
                cfg.power_dbm);
    std::printf("outer iterations : %d  (%.1f ms)\n", result.iterations, result.wall_ms);
    std::printf("final positions  :");
    for (Eigen::Index i = 0; i < result.positions.size(); ++i)
        std::printf(" %.6g", result.positions[i]);
    std::printf(" m\n");
    for (Eigen::Index k = 0; k < m.sinr.size(); ++k)
        std::printf("user %-12lld: SINR %.6g, rate %.6g bits\n",
                    static_cast<long long>(k), m.sinr[k], m.rate_bits[k]);
    std::printf("sum rate         : %.6g bits\n", m.sum_rate_bits());
    std::printf("SCNR             : %.6g (MI %.6g bits)\n", m.scnr, m.sensing_mi_bits);
    std::printf("objective        : %.6g bits\n", m.objective_bits);
    return 0;
}

int run_sweep_command(const CliOptions& opt, const std::string& variable,
                      std::vector<double> default_values) {
    ExperimentConfig cfg = load_config(opt);
    if (cfg.sweep_variable != variable || cfg.sweep_values.empty()) {
        cfg.sweep_variable = variable;
        cfg.sweep_values = std::move(default_values);
    }
    if (opt.print_config) {
        std::cout << config_to_json_text(cfg) << "\n";
        return 0;
    }

    const SweepOutput output = run_sweep(cfg);
    emit(output, cfg.output_path);

    std::printf("%zu records (%s x %zu values x %zu algorithms x %d seeds) -> %s\n",
                output.records.size(), variable.c_str(), cfg.sweep_values.size(),
                cfg.algorithms.size(), cfg.num_seeds, cfg.output_path.c_str());
    for (const SweepAggregate& a : output.aggregates)
        std::printf("  %s=%-8g %-12s N=%d  objective %.4f +/- %.4f bits\n",
                    variable.c_str(), a.sweep_value, a.algorithm.c_str(), a.n_antennas,
                    a.objective_mean, a.objective_stderr);

    if (variable == "power_dbm") {
        const double top = cfg.sweep_values.back();
        for (int n : cfg.n_antennas) {
            const SweepAggregate *spga_agg = nullptr, *fpa_agg = nullptr;
            for (const SweepAggregate& a : output.aggregates) {
                if (a.sweep_value != top || a.n_antennas != n) continue;
                if (a.algorithm == "SPGA_FBF_MA") spga_agg = &a;
                if (a.algorithm == "BF_FPA") fpa_agg = &a;
            }
            if (spga_agg && fpa_agg && fpa_agg->objective_mean > 0.0)
                std::printf("headline movable-vs-fixed gain at %g dBm, N=%d: %.1f%%\n", top,
                            n, 100.0 * (spga_agg->objective_mean - fpa_agg->objective_mean) /
                                   fpa_agg->objective_mean);
        }
    }

    const int failures =
        static_cast<int>(std::count_if(output.records.begin(), output.records.end(),
                                       [](const SweepRecord& r) { return r.failed; }));
    if (failures > 0) {
        std::fprintf(stderr, "%d record(s) failed\n", failures);
        return 1;
    }
    return 0;
}

bool check(const char* name, bool ok, int& failures) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
    return ok;
}

// Compact self-check of the closed forms against the slow oracles.
int run_verify(const CliOptions& opt) {
    ExperimentConfig cfg = load_config(opt);
    if (opt.print_config) {
        std::cout << config_to_json_text(cfg) << "\n";
        return 0;
    }
    int failures = 0;
    const Weights weights{0.5};

    bool gradient_ok = true, aux_ok = true, tight_ok = true;
    for (int trial = 0; trial < 8; ++trial) {
        const std::uint64_t seed = derive_stream(cfg.master_seed, 1000 + trial);
        ScenarioParams params = scenario_params_for(cfg, 4);
        params.num_paths = 5;
        const Scenario scenario = generate_scenario(seed, params);
        Rng rng(derive_stream(seed, 7));

        Eigen::VectorXd x(4);
        for (int i = 0; i < 4; ++i) x[i] = rng.uniform(0.0, 10.0 * params.wavelength);
        Beamformer F(4, scenario.num_users() + 1);
        for (int c = 0; c <= scenario.num_users(); ++c)
            for (int r = 0; r < 4; ++r) F(r, c) = rng.cgauss(1.0);

        AuxiliaryState aux;
        aux.mu = Eigen::VectorXd::Zero(scenario.num_users() + 1);
        XiUpdate xi = update_xi(F, x, aux.mu, scenario, weights);
        aux.xi_c = xi.xi_c;
        aux.xi_s = xi.xi_s;
        for (int i = 0; i < 25; ++i) {
            aux.mu = update_mu(F, x, aux, scenario, weights);
            xi = update_xi(F, x, aux.mu, scenario, weights);
            aux.xi_c = xi.xi_c;
            aux.xi_s = xi.xi_s;
        }

        // analytic vs finite-difference gradient
        const Eigen::VectorXd analytic = surrogate_gradient(x, F, aux, scenario, weights);
        const Eigen::VectorXd numeric = fd_gradient(
            [&](const Eigen::VectorXd& p) { return surrogate(F, p, aux, scenario, weights); },
            x);
        for (int i = 0; i < 4; ++i) {
            const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-10});
            if (std::abs(analytic[i] - numeric[i]) / scale > 1e-5) gradient_ok = false;
        }

        // fixed-point tightness against the true objective
        double truth = 0.0;
        for (int k = 0; k < scenario.num_users(); ++k)
            truth += weights.comm * std::log(1.0 + sinr(k, F, scenario, x));
        truth += weights.sense() * std::log(1.0 + scnr(F, scenario, x));
        const double tight = surrogate(F, x, aux, scenario, weights);
        if (std::abs(tight - truth) > 1e-8 * std::max(1.0, std::abs(truth)))
            tight_ok = false;

        // closed-form auxiliaries vs the numeric maximizer
        if (trial < 3) {
            const AuxiliaryState numeric_aux =
                numeric_aux_maximizer(F, x, scenario, weights);
            for (int i = 0; i <= scenario.num_users(); ++i)
                if (std::abs(numeric_aux.mu[i] - aux.mu[i]) >
                    1e-6 * std::max(1.0, std::abs(aux.mu[i])))
                    aux_ok = false;
            for (int i = 0; i < scenario.num_users(); ++i)
                if (std::abs(numeric_aux.xi_c[i] - aux.xi_c[i]) > 1e-6) aux_ok = false;
            for (int i = 0; i <= scenario.num_users(); ++i)
                if (std::abs(numeric_aux.xi_s[i] - aux.xi_s[i]) > 1e-6) aux_ok = false;
        }
    }
    check("analytic gradient matches central differences", gradient_ok, failures);
    check("aux fixed point is tight against the true objective", tight_ok, failures);
    check("closed-form aux updates match the numeric maximizer", aux_ok, failures);

    // projection: feasibility + idempotence on random inputs
    {
        bool ok = true;
        Rng rng(derive_stream(cfg.master_seed, 42));
        ArrayGeometry geometry;
        geometry.x_min = 0.0;
        geometry.x_max = 1.0;
        geometry.d0 = 0.05;
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd x(6);
            for (int i = 0; i < 6; ++i) x[i] = rng.uniform(-0.5, 1.5);
            const ProjectionResult p = project_positions(x, geometry);
            if (!is_feasible(p.positions, geometry)) ok = false;
            const ProjectionResult p2 = project_positions(p.positions, geometry);
            if (p2.positions != p.positions) ok = false;
        }
        check("projection output is feasible and idempotent", ok, failures);
    }

    if (failures == 0) std::printf("verify: all checks passed\n");
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flexbeam: joint beamforming and antenna-position optimization "
                 "for movable-antenna ISAC"};
    app.require_subcommand(1);

    CliOptions opt;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--seed", opt.master_seed, "master seed")
            ->envname("FLEXBEAM_SEED")
            ->each([&](const std::string&) { opt.seed_set = true; });
        sub->add_option("--seeds", opt.num_seeds, "Monte Carlo seeds per point")
            ->each([&](const std::string&) { opt.seeds_set = true; });
        sub->add_option("--out", opt.out_path, "output directory")
            ->each([&](const std::string&) { opt.out_set = true; });
        sub->add_flag("--print-config", opt.print_config,
                      "print the effective config and exit");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "single solve, prints the metrics report");
    add_common(cmd_run);
    cmd_run->add_option("--algorithm", opt.algorithm,
                        "SPGA_FBF_MA | DGA_FBF_MA | BF_FPA");

    CLI::App* cmd_power =
        app.add_subcommand("sweep-power", "objective vs transmit power budget");
    CLI::App* cmd_region =
        app.add_subcommand("sweep-region", "objective vs antenna moving region");
    CLI::App* cmd_tradeoff =
        app.add_subcommand("sweep-tradeoff", "rate / sensing-MI trade-off vs weight");
    CLI::App* cmd_verify = app.add_subcommand("verify", "run the oracle self-checks");
    add_common(cmd_power);
    add_common(cmd_region);
    add_common(cmd_tradeoff);
    add_common(cmd_verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_run->parsed()) return run_single(opt);
        if (cmd_power->parsed())
            return run_sweep_command(opt, "power_dbm", arange(10.0, 40.0, 5.0));
        if (cmd_region->parsed())
            return run_sweep_command(opt, "region_lambda", arange(6.0, 21.0, 1.0));
        if (cmd_tradeoff->parsed())
            return run_sweep_command(opt, "comm_weight", arange(0.0, 1.0, 0.1));
        if (cmd_verify->parsed()) return run_verify(opt);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
