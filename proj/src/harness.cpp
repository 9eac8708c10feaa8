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

#include "flexbeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "flexbeam/rng.hpp"

namespace flexbeam {

using nlohmann::json;

double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

ScenarioParams scenario_params_for(const ExperimentConfig& cfg, int n_antennas) {
    ScenarioParams p;
    p.num_users = cfg.num_users;
    p.num_clutter = cfg.num_clutter;
    p.num_antennas = n_antennas;
    p.num_paths = cfg.num_paths;
    p.wavelength = cfg.wavelength;
    p.target_angle = cfg.target_angle_deg * M_PI / 180.0;
    p.gain_variance = cfg.gain_variance;
    p.user_noise = cfg.user_noise;
    p.sensing_noise = cfg.sensing_noise;
    return p;
}

ArrayGeometry geometry_for(const ExperimentConfig& cfg, double region_lambda) {
    ArrayGeometry g;
    g.x_min = cfg.x_min_lambda * cfg.wavelength;
    g.x_max = region_lambda * cfg.wavelength;
    g.d0 = cfg.d0_lambda * cfg.wavelength;
    return g;
}

SolverConfig solver_config_for(const ExperimentConfig& cfg, double sweep_value,
                               const std::string& algorithm) {
    SolverConfig s;
    s.power_budget = dbm_to_watts(
        cfg.sweep_variable == "power_dbm" ? sweep_value : cfg.power_dbm);
    s.weights.comm =
        cfg.sweep_variable == "comm_weight" ? sweep_value : cfg.comm_weight;
    s.outer_tol = cfg.outer_tol;
    s.outer_max_iters = cfg.outer_max_iters;
    s.algorithm = algorithm_from_string(algorithm);
    return s;
}

namespace {

void validate(const ExperimentConfig& cfg) {
    if (cfg.sweep_variable != "power_dbm" && cfg.sweep_variable != "region_lambda" &&
        cfg.sweep_variable != "comm_weight")
        throw std::invalid_argument("run_sweep: unknown sweep_variable '" +
                                    cfg.sweep_variable + "'");
    if (cfg.sweep_values.empty())
        throw std::invalid_argument("run_sweep: sweep_values must be nonempty");
    if (!std::is_sorted(cfg.sweep_values.begin(), cfg.sweep_values.end()))
        throw std::invalid_argument("run_sweep: sweep_values must be sorted ascending");
    if (cfg.num_seeds < 1)
        throw std::invalid_argument("run_sweep: num_seeds must be >= 1");
    if (cfg.n_antennas.empty())
        throw std::invalid_argument("run_sweep: n_antennas must be nonempty");
    for (const std::string& a : cfg.algorithms) algorithm_from_string(a); // throws
}

struct Task {
    double value;
    std::string algorithm;
    int n_antennas;
    int seed;
};

SweepRecord run_task(const ExperimentConfig& cfg, const Task& task) {
    SweepRecord rec;
    rec.seed = task.seed;
    rec.sweep_var = cfg.sweep_variable;
    rec.sweep_value = task.value;
    rec.algorithm = task.algorithm;
    rec.n_antennas = task.n_antennas;
    try {
        const Scenario scenario =
            generate_scenario(derive_stream(cfg.master_seed, static_cast<std::uint64_t>(task.seed)),
                              scenario_params_for(cfg, task.n_antennas));
        const double region = cfg.sweep_variable == "region_lambda" ? task.value
                                                                    : cfg.x_max_lambda;
        const ArrayGeometry geometry = geometry_for(cfg, region);
        const SolverConfig solver_cfg = solver_config_for(cfg, task.value, task.algorithm);
        const SolveResult result = solve(scenario, geometry, solver_cfg);
        rec.objective_bits = result.metrics.objective_bits;
        rec.sum_rate_bits = result.metrics.sum_rate_bits();
        rec.sensing_mi_bits = result.metrics.sensing_mi_bits;
        rec.outer_iters = result.iterations;
        rec.wall_ms = result.wall_ms;
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.objective_bits = rec.sum_rate_bits = rec.sensing_mi_bits =
            std::numeric_limits<double>::quiet_NaN();
    }
    return rec;
}

std::vector<SweepAggregate> aggregate(const std::vector<SweepRecord>& records) {
    // Keyed by (value, algorithm, N); records are already sorted that way.
    std::vector<SweepAggregate> out;
    auto same_group = [](const SweepRecord& r, const SweepAggregate& a) {
        return r.sweep_value == a.sweep_value && r.algorithm == a.algorithm &&
               r.n_antennas == a.n_antennas;
    };
    for (const SweepRecord& r : records) {
        if (r.failed) continue;
        if (out.empty() || !same_group(r, out.back())) {
            SweepAggregate a;
            a.sweep_var = r.sweep_var;
            a.sweep_value = r.sweep_value;
            a.algorithm = r.algorithm;
            a.n_antennas = r.n_antennas;
            out.push_back(a);
        }
        SweepAggregate& a = out.back();
        ++a.count;
        a.objective_mean += r.objective_bits;
        a.sum_rate_mean += r.sum_rate_bits;
        a.sensing_mi_mean += r.sensing_mi_bits;
    }
    // second pass for the standard errors
    for (SweepAggregate& a : out) {
        a.objective_mean /= a.count;
        a.sum_rate_mean /= a.count;
        a.sensing_mi_mean /= a.count;
    }
    for (const SweepRecord& r : records) {
        if (r.failed) continue;
        for (SweepAggregate& a : out) {
            if (!same_group(r, a)) continue;
            a.objective_stderr += std::pow(r.objective_bits - a.objective_mean, 2);
            a.sum_rate_stderr += std::pow(r.sum_rate_bits - a.sum_rate_mean, 2);
            a.sensing_mi_stderr += std::pow(r.sensing_mi_bits - a.sensing_mi_mean, 2);
            break;
        }
    }
    for (SweepAggregate& a : out) {
        if (a.count > 1) {
            const double scale = 1.0 / (a.count * (a.count - 1));
            a.objective_stderr = std::sqrt(a.objective_stderr * scale);
            a.sum_rate_stderr = std::sqrt(a.sum_rate_stderr * scale);
            a.sensing_mi_stderr = std::sqrt(a.sensing_mi_stderr * scale);
        } else {
            a.objective_stderr = a.sum_rate_stderr = a.sensing_mi_stderr = 0.0;
        }
    }
    return out;
}

} // namespace

SweepOutput run_sweep(const ExperimentConfig& cfg) {
    validate(cfg);

    std::vector<Task> tasks;
    for (double value : cfg.sweep_values)
        for (const std::string& algo : cfg.algorithms)
            for (int n : cfg.n_antennas)
                for (int seed = 0; seed < cfg.num_seeds; ++seed)
                    tasks.push_back({value, algo, n, seed});

    std::vector<SweepRecord> records(tasks.size());
    std::atomic<size_t> next{0};
    unsigned workers = cfg.num_workers > 0 ? static_cast<unsigned>(cfg.num_workers)
                                           : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));

    const auto drain = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            records[i] = run_task(cfg, tasks[i]);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(drain);
    drain();
    for (std::thread& t : pool) t.join();

    std::sort(records.begin(), records.end(),
              [](const SweepRecord& a, const SweepRecord& b) {
                  return std::tie(a.sweep_value, a.algorithm, a.n_antennas, a.seed) <
                         std::tie(b.sweep_value, b.algorithm, b.n_antennas, b.seed);
              });

    SweepOutput out;
    out.records = std::move(records);
    out.aggregates = aggregate(out.records);
    out.config = cfg;
    out.any_failed = std::any_of(out.records.begin(), out.records.end(),
                                 [](const SweepRecord& r) { return r.failed; });
    return out;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// RFC-style field quoting: quote when the field holds a comma, quote or
// newline; embedded quotes double.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

constexpr const char* kRecordsHeader =
    "seed,sweep_var,sweep_value,algorithm,n_antennas,objective_bits,"
    "sum_rate_bits,sensing_mi_bits,outer_iters,wall_ms";

void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << kRecordsHeader << "\n";
    for (const SweepRecord& r : records) {
        os << r.seed << ',' << csv_field(r.sweep_var) << ',' << fmt(r.sweep_value) << ','
           << csv_field(r.algorithm) << ',' << r.n_antennas << ','
           << fmt(r.objective_bits) << ',' << fmt(r.sum_rate_bits) << ','
           << fmt(r.sensing_mi_bits) << ',' << r.outer_iters << ',' << fmt(r.wall_ms)
           << "\n";
    }
}

void write_aggregates_csv(std::ostream& os, const std::vector<SweepAggregate>& aggregates) {
    os << "sweep_var,sweep_value,algorithm,n_antennas,num_seeds,objective_mean,"
          "objective_stderr,sum_rate_mean,sum_rate_stderr,sensing_mi_mean,"
          "sensing_mi_stderr\n";
    for (const SweepAggregate& a : aggregates) {
        os << csv_field(a.sweep_var) << ',' << fmt(a.sweep_value) << ','
           << csv_field(a.algorithm) << ',' << a.n_antennas << ',' << a.count << ','
           << fmt(a.objective_mean) << ',' << fmt(a.objective_stderr) << ','
           << fmt(a.sum_rate_mean) << ',' << fmt(a.sum_rate_stderr) << ','
           << fmt(a.sensing_mi_mean) << ',' << fmt(a.sensing_mi_stderr) << "\n";
    }
}

// x value in the first column, one mean-value column per (algorithm, N).
void write_plot_data(std::ostream& os, const std::vector<SweepAggregate>& aggregates,
                     double SweepAggregate::* field) {
    std::vector<std::pair<std::string, int>> combos;
    std::vector<double> values;
    for (const SweepAggregate& a : aggregates) {
        if (std::find(combos.begin(), combos.end(),
                      std::make_pair(a.algorithm, a.n_antennas)) == combos.end())
            combos.emplace_back(a.algorithm, a.n_antennas);
        if (values.empty() || values.back() != a.sweep_value)
            values.push_back(a.sweep_value);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::sort(combos.begin(), combos.end());

    os << "# sweep_value";
    for (const auto& [algo, n] : combos) os << ' ' << algo << "_N" << n;
    os << "\n";
    for (double v : values) {
        os << fmt(v);
        for (const auto& [algo, n] : combos) {
            const auto it = std::find_if(
                aggregates.begin(), aggregates.end(), [&](const SweepAggregate& a) {
                    return a.sweep_value == v && a.algorithm == algo && a.n_antennas == n;
                });
            os << ' ' << (it != aggregates.end() ? fmt((*it).*field) : "nan");
        }
        os << "\n";
    }
}

json config_to_json(const ExperimentConfig& c) {
    return json{{"num_users", c.num_users},
                {"num_clutter", c.num_clutter},
                {"num_paths", c.num_paths},
                {"n_antennas", c.n_antennas},
                {"wavelength", c.wavelength},
                {"target_angle_deg", c.target_angle_deg},
                {"user_noise", c.user_noise},
                {"sensing_noise", c.sensing_noise},
                {"gain_variance", c.gain_variance},
                {"x_min_lambda", c.x_min_lambda},
                {"x_max_lambda", c.x_max_lambda},
                {"d0_lambda", c.d0_lambda},
                {"power_dbm", c.power_dbm},
                {"comm_weight", c.comm_weight},
                {"outer_tol", c.outer_tol},
                {"outer_max_iters", c.outer_max_iters},
                {"sweep_variable", c.sweep_variable},
                {"sweep_values", c.sweep_values},
                {"algorithms", c.algorithms},
                {"num_seeds", c.num_seeds},
                {"master_seed", c.master_seed},
                {"output_path", c.output_path},
                {"num_workers", c.num_workers}};
}

} // namespace

void emit(const SweepOutput& output, const std::string& path) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec)
        throw std::runtime_error("emit: cannot create output directory '" + path +
                                 "': " + ec.message());

    const auto open = [&](const std::string& name) {
        std::ofstream os(fs::path(path) / name, std::ios::binary);
        if (!os)
            throw std::runtime_error("emit: cannot open '" + (fs::path(path) / name).string() +
                                     "' for writing");
        return os;
    };

    {
        auto os = open("records.csv");
        write_records_csv(os, output.records);
    }
    {
        auto os = open("aggregates.csv");
        write_aggregates_csv(os, output.aggregates);
    }

    if (output.config.sweep_variable == "comm_weight") {
        auto rate = open("plot_sum_rate.dat");
        write_plot_data(rate, output.aggregates, &SweepAggregate::sum_rate_mean);
        auto mi = open("plot_sensing_mi.dat");
        write_plot_data(mi, output.aggregates, &SweepAggregate::sensing_mi_mean);
    } else {
        auto os = open("plot_objective.dat");
        write_plot_data(os, output.aggregates, &SweepAggregate::objective_mean);
    }

    json manifest;
    manifest["library_version"] = kVersion;
    manifest["master_seed"] = output.config.master_seed;
    manifest["config"] = config_to_json(output.config);
    manifest["any_failed"] = output.any_failed;

    // Headline movable-vs-fixed gain at the highest power point, reported but
    // never gated: the averaging behind the published number is unspecified.
    if (output.config.sweep_variable == "power_dbm") {
        json gains = json::object();
        const double top = output.config.sweep_values.back();
        for (int n : output.config.n_antennas) {
            const SweepAggregate* spga_agg = nullptr;
            const SweepAggregate* fpa_agg = nullptr;
            for (const SweepAggregate& a : output.aggregates) {
                if (a.sweep_value != top || a.n_antennas != n) continue;
                if (a.algorithm == "SPGA_FBF_MA") spga_agg = &a;
                if (a.algorithm == "BF_FPA") fpa_agg = &a;
            }
            if (spga_agg && fpa_agg && fpa_agg->objective_mean > 0.0)
                gains["N" + std::to_string(n)] =
                    100.0 * (spga_agg->objective_mean - fpa_agg->objective_mean) /
                    fpa_agg->objective_mean;
        }
        if (!gains.empty()) manifest["headline_gain_percent"] = gains;
    }

    auto os = open("manifest.json");
    os << manifest.dump(2) << "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

} // namespace

std::vector<SweepRecord> parse_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader)
        throw std::invalid_argument("parse_records_csv: missing or unexpected header");

    std::vector<SweepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10)
            throw std::invalid_argument("parse_records_csv: expected 10 fields, got " +
                                        std::to_string(f.size()));
        SweepRecord r;
        r.seed = std::stoi(f[0]);
        r.sweep_var = f[1];
        r.sweep_value = std::strtod(f[2].c_str(), nullptr);
        r.algorithm = f[3];
        r.n_antennas = std::stoi(f[4]);
        r.objective_bits = std::strtod(f[5].c_str(), nullptr);
        r.sum_rate_bits = std::strtod(f[6].c_str(), nullptr);
        r.sensing_mi_bits = std::strtod(f[7].c_str(), nullptr);
        r.outer_iters = std::stoi(f[8]);
        r.wall_ms = std::strtod(f[9].c_str(), nullptr);
        records.push_back(std::move(r));
    }
    return records;
}

std::uint64_t scenario_hash(const Scenario& scenario) {
    std::ostringstream os;
    os << fmt(scenario.wavelength) << '|' << scenario.num_antennas << '|';
    for (const PathCluster& u : scenario.users) {
        for (Eigen::Index l = 0; l < u.angles.size(); ++l)
            os << fmt(u.angles[l]) << ',' << fmt(u.gains[l].real()) << ','
               << fmt(u.gains[l].imag()) << ';';
        os << '|';
    }
    for (Eigen::Index k = 0; k < scenario.user_noise.size(); ++k)
        os << fmt(scenario.user_noise[k]) << ',';
    os << '|' << fmt(scenario.target_angle) << ',' << fmt(scenario.target_gain.real())
       << ',' << fmt(scenario.target_gain.imag()) << '|';
    for (Eigen::Index c = 0; c < scenario.clutter_angles.size(); ++c)
        os << fmt(scenario.clutter_angles[c]) << ',' << fmt(scenario.clutter_gains[c].real())
           << ',' << fmt(scenario.clutter_gains[c].imag()) << ';';
    os << '|' << fmt(scenario.sensing_noise);

    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

    ExperimentConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "num_users") c.num_users = value.get<int>();
            else if (key == "num_clutter") c.num_clutter = value.get<int>();
            else if (key == "num_paths") c.num_paths = value.get<int>();
            else if (key == "n_antennas") c.n_antennas = value.get<std::vector<int>>();
            else if (key == "wavelength") c.wavelength = value.get<double>();
            else if (key == "target_angle_deg") c.target_angle_deg = value.get<double>();
            else if (key == "user_noise") c.user_noise = value.get<double>();
            else if (key == "sensing_noise") c.sensing_noise = value.get<double>();
            else if (key == "gain_variance") c.gain_variance = value.get<double>();
            else if (key == "x_min_lambda") c.x_min_lambda = value.get<double>();
            else if (key == "x_max_lambda") c.x_max_lambda = value.get<double>();
            else if (key == "d0_lambda") c.d0_lambda = value.get<double>();
            else if (key == "power_dbm") c.power_dbm = value.get<double>();
            else if (key == "comm_weight") c.comm_weight = value.get<double>();
            else if (key == "outer_tol") c.outer_tol = value.get<double>();
            else if (key == "outer_max_iters") c.outer_max_iters = value.get<int>();
            else if (key == "sweep_variable") c.sweep_variable = value.get<std::string>();
            else if (key == "sweep_values") c.sweep_values = value.get<std::vector<double>>();
            else if (key == "algorithms") c.algorithms = value.get<std::vector<std::string>>();
            else if (key == "num_seeds") c.num_seeds = value.get<int>();
            else if (key == "master_seed") c.master_seed = value.get<std::uint64_t>();
            else if (key == "output_path") c.output_path = value.get<std::string>();
            else if (key == "num_workers") c.num_workers = value.get<int>();
            else throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: bad value type: ") + e.what());
    }
    return c;
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    return config_to_json(cfg).dump(2);
}

} // namespace flexbeam
