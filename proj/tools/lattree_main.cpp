#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "lattree/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lattice-tree scaling-limit toolkit"};
    std::string kind, config_path, out;
    long long seed = -1;
    int workers = 0;
    app.add_option("kind", kind, "experiment kind")->required();
    app.add_option("--config", config_path, "key=value config file")->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--workers", workers, "worker threads (does not affect results)");
    app.add_option("--out", out, "output directory");
    CLI11_PARSE(app, argc, argv);

    try {
        auto kv = lattree::read_config_file(config_path);
        if (seed >= 0) kv["seed"] = std::to_string(seed);
        lattree::ExperimentConfig cfg = lattree::make_config(kind, std::move(kv));
        if (workers > 0) cfg.workers = workers;
        if (!out.empty()) cfg.out = out;
        return lattree::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
