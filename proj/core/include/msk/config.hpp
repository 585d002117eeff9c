#pragma once

// Experiment configuration (JSON in), command dispatch, and report
// emission (CSV with '#' metadata header, optional JSON report).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msk/mcmc.hpp"
#include "msk/model.hpp"
#include "msk/tap.hpp"

namespace msk {

struct ExperimentConfig {
    ModelSpec model;
    std::string preset;  // empty when the model was given explicitly

    std::vector<int> n_list;
    int n_disorder = 20;
    ChainConfig chain;
    std::optional<double> gamma;  // concentration; omitted -> admissible midpoint
    int k = 1;                    // cavity moment order (2k-th moment)
    int n_eta = 200;
    int species = 0;
    std::string estimator = "mcmc";  // scaling-study / tap-check: exact | mcmc
    int max_iter = 1000;
    double tol = 1e-10;
    bool dry_run = false;
    std::optional<uint64_t> seed;

    nlohmann::json echo;  // the parsed config, for the report round-trip
};

// Built-in variance-profile presets: sk, bipartite, two-copies, convex.
ModelSpec preset_model(const std::string& name, double beta, double h, int n);

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j);

struct RunReport {
    std::string csv;
    nlohmann::json json;
};

// Dispatches one subcommand. `seed` and `threads` come from the CLI layer;
// seed falls back to the config, then to OS entropy (always recorded).
RunReport run(const std::string& command, const ExperimentConfig& cfg,
              std::optional<uint64_t> seed_override, int threads);

inline constexpr const char* kVersion = "0.1.0";

} // namespace msk
