#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "pickling/advisor.hpp"
#include "pickling/decision_tree.hpp"
#include "pickling/recbfn.hpp"
#include "pickling/simulator.hpp"

namespace pickling {

// Everything the tools read from the configuration file.
//
// File format: one `key = value` per line, `#` starts a comment, blank lines are
// ignored, keys are unique. Lists are whitespace separated; speed ratio components
// are separated by `;` as `weight lo hi`. See config/pickling.conf for every key.
struct AppConfig {
    sim::SimulatorConfig simulator;
    advisor::ScanGrid grid;
    recbfn::Thresholds thresholds;
    std::size_t max_epochs = 20;
    tree::TreeConfig tree;
    double train_fraction = 0.75;
    std::uint64_t split_seed = 7;
    std::size_t simulate_count = 1800;
    double simulate_defect_fraction = 0.75;
    std::uint64_t simulate_seed = 42;
    std::string data_path = "coils.csv";
    std::string model_dir = "models";

    void validate() const;  // throws ConfigError
};

// Simulator kinetics, geometry and sampling ranges are required keys; the rest
// fall back to the defaults above. Throws ConfigError naming the line or key.
AppConfig parse_config(const std::string& text);
AppConfig load_config(const std::string& path);

}  // namespace pickling
