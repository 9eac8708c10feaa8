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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flexbeam/model.hpp"
#include "flexbeam/solver.hpp"

namespace flexbeam {

inline constexpr const char* kVersion = "0.1.0";

/// One Monte Carlo experiment: fixed scenario parameters, a swept variable,
/// the algorithms to compare and the seed budget. Geometry is specified in
/// multiples of the wavelength; angles in degrees.
struct ExperimentConfig {
    // scenario
    int num_users = 4;    // K
    int num_clutter = 3;  // C
    int num_paths = 13;   // L_p
    std::vector<int> n_antennas{4};
    double wavelength = 0.1;       // meters
    double target_angle_deg = 60.0;
    double user_noise = 1.0;       // sigma_k^2
    double sensing_noise = 1.0;    // sigma_s^2
    double gain_variance = 1.0;

    // geometry, in wavelengths
    double x_min_lambda = 0.0;
    double x_max_lambda = 10.0;
    double d0_lambda = 0.5;

    // solver
    double power_dbm = 30.0;
    double comm_weight = 0.5;
    double outer_tol = 1e-4;
    int outer_max_iters = 100;

    // sweep
    std::string sweep_variable;       // power_dbm | region_lambda | comm_weight
    std::vector<double> sweep_values; // nonempty, sorted ascending
    std::vector<std::string> algorithms{"SPGA_FBF_MA", "DGA_FBF_MA", "BF_FPA"};
    int num_seeds = 50;
    std::uint64_t master_seed = 1;
    std::string output_path = "out";
    int num_workers = 0; // 0 -> hardware concurrency
};

/// Result of one (sweep value, algorithm, N, seed) solve.
struct SweepRecord {
    int seed = 0;
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string algorithm;
    int n_antennas = 0;
    double objective_bits = 0.0;
    double sum_rate_bits = 0.0;
    double sensing_mi_bits = 0.0;
    int outer_iters = 0;
    double wall_ms = 0.0;
    bool failed = false;
    std::string error;
};

/// Per-(value, algorithm, N) mean and standard error over seeds.
struct SweepAggregate {
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string algorithm;
    int n_antennas = 0;
    int count = 0;
    double objective_mean = 0.0, objective_stderr = 0.0;
    double sum_rate_mean = 0.0, sum_rate_stderr = 0.0;
    double sensing_mi_mean = 0.0, sensing_mi_stderr = 0.0;
};

struct SweepOutput {
    std::vector<SweepRecord> records;      // sorted by (value, algorithm, N, seed)
    std::vector<SweepAggregate> aggregates;
    ExperimentConfig config;
    bool any_failed = false;
};

/// dBm to linear watts: 10^((p_dbm - 30) / 10).
double dbm_to_watts(double p_dbm);

/// Runs the full (value x algorithm x N x seed) grid. Scenario draws depend
/// only on (master_seed, seed index) and the fixed scenario parameters, so
/// every algorithm and sweep value sees the identical channel at a given
/// seed and all comparisons are paired. Solve errors mark the record failed
/// and the sweep continues.
SweepOutput run_sweep(const ExperimentConfig& cfg);

/// Writes records.csv, aggregates.csv, per-figure plot-data files and a JSON
/// run manifest under `path` (created if missing).
void emit(const SweepOutput& output, const std::string& path);

/// Inverse of the records.csv serialization, for round-trip checks and
/// external tooling.
std::vector<SweepRecord> parse_records_csv(std::istream& in);

/// Content hash of a scenario (FNV-1a over the canonical text form); used to
/// assert paired seeding across algorithms.
std::uint64_t scenario_hash(const Scenario& scenario);

/// JSON round trip for config files. Unknown keys are rejected; missing keys
/// keep their defaults. Throws std::invalid_argument on malformed input.
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

/// Scenario parameters / geometry / solver config for one sweep point.
ScenarioParams scenario_params_for(const ExperimentConfig& cfg, int n_antennas);
ArrayGeometry geometry_for(const ExperimentConfig& cfg, double region_lambda);
SolverConfig solver_config_for(const ExperimentConfig& cfg, double sweep_value,
                               const std::string& algorithm);

} // namespace flexbeam
