#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lattree {

// One experiment run: kind, model parameters, schedule lists, reproducibility
// controls. `raw` echoes the parsed key-value pairs into the manifest.
struct ExperimentConfig {
    std::string kind;

    int d = 4, L = 1, n = 50;
    double h = 1.0;
    int K = 2, K1 = 10, K2 = 100, M = 100;
    std::string offspring = "geometric";
    double z = 1.0, step = 0.05, horizon = 0.5;

    double eps = 0.5, tail_threshold = 0.05, threshold = 0.05;
    int grid = 1000, trials = 100;
    std::size_t max_vertices = 200000;

    std::vector<int> n_list, K_list, K1_list;
    std::vector<std::pair<int, int>> pairs; // (K1, K2) schedule
    std::vector<double> times;

    int replicas = 100;
    int workers = 1;
    unsigned long long seed = 1;
    std::string out = "out";

    std::map<std::string, std::string> raw;
};

// flat `key = value` lines; '#' comments and blank lines ignored
std::map<std::string, std::string> read_config_file(const std::string& path);

// throws std::invalid_argument on unknown kind or malformed values
ExperimentConfig make_config(std::string kind,
                             std::map<std::string, std::string> kv);

// stable 64-bit digest of the model parameters and seed (not workers/out)
std::string manifest_hash(const ExperimentConfig& cfg);

// Runs the experiment, writing manifest.json, report.json, CSV and SVG files
// into cfg.out. Returns 0 on success, nonzero after printing an error.
int run_experiment(const ExperimentConfig& cfg);

} // namespace lattree
