#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitfeat/experiments.hpp"

namespace orbitfeat {

/// CSV-backed dataset description: one sample per row, label/target in the
/// last column, optional header line.
struct DatasetConfig {
    std::string train_path;
    std::string test_path;
    InputLayout layout;
    TaskKind kind = TaskKind::Regression;
    bool has_header = false;
    int n_classes = 0;  // 0: inferred from labels
};

/// Fully-resolved, schema-validated run description. Unknown keys anywhere
/// in the document are rejected.
struct ExperimentConfig {
    std::string command;  // optional in the file; checked against the CLI verb
    std::uint64_t seed = 0;
    double sigma = 0.0;  // 0: median heuristic on the data
    GroupDistribution dist;
    FeaturePlan plan;
    std::optional<SyntheticTask> task;
    std::optional<DatasetConfig> dataset;
    CVGrid grid;

    // sweep
    std::string sweep_axis = "s";
    std::vector<int> sweep_values;
    std::vector<int> sweep_r_values{20, 40};
    int sweep_fixed_s = 2048;
    int sweep_batch = 200;
    int sweep_replicates = 4;
    int oracle_r = 70;
    bool oracle_exhaustive = false;

    // bench
    std::vector<std::string> methods{"vanilla_rf", "lgika_rf"};
    std::vector<int> layer_counts{1};
    std::vector<std::uint64_t> bench_seeds{1, 2, 3, 4, 5};

    // probe
    std::vector<int> probe_n_values;
    std::vector<int> probe_s_values;
    std::vector<int> probe_r_values;
    int probe_seeds = 5;
    double probe_lambda = 1e-4;

    std::string out_dir = "out";
    std::string format = "csv";  // csv | json

    /// The config echoed with every default made explicit.
    nlohmann::json resolved() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json load_json_file(const std::string& path);

Dataset load_dataset(const DatasetConfig& cfg);

/// Entry point behind the orbitfeat binary. Returns the process exit code:
/// 0 success, 1 config error, 2 runtime error.
int run_cli(const std::vector<std::string>& args);

}  // namespace orbitfeat
