#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "orbitfeat/config.hpp"
#include "orbitfeat/csv.hpp"
#include "orbitfeat/parallel.hpp"
#include "orbitfeat/selfcheck.hpp"
#include "orbitfeat/serialize.hpp"

namespace orbitfeat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Doubles in json tables go through the same 9-significant-digit formatting
/// as the csv output.
json num9(double v) { return json(std::stod(format_g9(v))); }

void write_table(const std::string& path_base, const std::string& format,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<json>>& rows) {
    if (format == "csv") {
        CsvWriter csv(path_base + ".csv");
        csv.header(columns);
        for (const auto& row : rows) {
            std::vector<std::string> cells;
            cells.reserve(row.size());
            for (const auto& v : row) {
                if (v.is_number_float()) {
                    cells.push_back(format_g9(v.get<double>()));
                } else if (v.is_string()) {
                    cells.push_back(v.get<std::string>());
                } else {
                    cells.push_back(v.dump());
                }
            }
            csv.line(cells);
        }
        csv.close();
        return;
    }
    json out = json::array();
    for (const auto& row : rows) {
        json obj;
        for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
        out.push_back(obj);
    }
    std::ofstream f(path_base + ".json");
    if (!f) throw std::runtime_error("cannot open for writing: " + path_base + ".json");
    f << out.dump(2) << '\n';
}

void write_resolved_config(const ExperimentConfig& cfg) {
    std::ofstream f(fs::path(cfg.out_dir) / "resolved_config.json");
    if (!f) throw std::runtime_error("cannot write resolved config");
    f << cfg.resolved().dump(2) << '\n';
}

Dataset resolve_data(const ExperimentConfig& cfg) {
    if (cfg.dataset) return load_dataset(*cfg.dataset);
    if (!cfg.task) throw std::invalid_argument("config: this command needs a task");
    SyntheticTask task = *cfg.task;
    task.seed = cfg.seed;
    return generate_task(task);
}

int cmd_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep_values.empty())
        throw std::invalid_argument("config: sweep.values is required for the sweep command");
    SweepConfig sc;
    sc.axis = cfg.sweep_axis;
    sc.values = cfg.sweep_values;
    sc.r_values = cfg.sweep_r_values;
    sc.fixed_s = cfg.sweep_fixed_s;
    sc.batch = cfg.sweep_batch;
    sc.replicates = cfg.sweep_replicates;
    sc.oracle_r = cfg.oracle_r;
    sc.oracle_exhaustive = cfg.oracle_exhaustive;
    sc.sigma = cfg.sigma;
    sc.dist = cfg.dist;
    sc.variant = cfg.plan.variant;
    sc.transfer = cfg.plan.transfer;
    sc.unitary_normalize = cfg.plan.unitary_normalize;
    sc.seed = cfg.seed;
    if (cfg.dataset) {
        const Dataset data = load_dataset(*cfg.dataset);
        sc.fixed_batch = data.x_train;
        sc.fixed_layout = data.layout;
    } else if (cfg.task) {
        sc.task = *cfg.task;
    } else {
        throw std::invalid_argument("config: sweep needs a task");
    }

    const ApproxErrorReport report = approx_error_sweep(sc);
    std::vector<std::vector<json>> rows;
    for (const auto& p : report.points)
        rows.push_back({p.axis_value, num9(p.spectral_err), num9(p.frobenius_err), p.r, p.seed});
    write_table((fs::path(cfg.out_dir) / "sweep").string(), cfg.format,
                {"axis_value", "spectral_err", "frobenius_err", "r", "seed"}, rows);
    std::cerr << "[orbitfeat] sweep: " << rows.size() << " points (sigma "
              << format_g9(report.sigma_used) << ", oracle pool " << report.oracle_r << ")\n";
    return 0;
}

int cmd_bench(const ExperimentConfig& cfg) {
    BenchmarkConfig bc;
    if (cfg.dataset) {
        bc.fixed_data = load_dataset(*cfg.dataset);
    } else if (cfg.task) {
        bc.task = *cfg.task;
    } else {
        throw std::invalid_argument("config: bench needs a task");
    }
    bc.methods = cfg.methods;
    bc.layer_counts = cfg.layer_counts;
    bc.seeds = cfg.bench_seeds;
    bc.plan = cfg.plan;
    bc.dist = cfg.dist;
    bc.sigma = cfg.sigma;
    bc.grid = cfg.grid;

    const ResultTable table = run_benchmark(bc);
    std::vector<std::vector<json>> rows;
    for (const auto& r : table)
        rows.push_back({r.method, r.layers, r.fold, r.metric, num9(r.value), r.seed});
    write_table((fs::path(cfg.out_dir) / "results").string(), cfg.format,
                {"method", "layer", "fold", "metric", "value", "seed"}, rows);
    std::cerr << "[orbitfeat] bench: " << rows.size() << " result rows\n";
    return 0;
}

int cmd_probe(const ExperimentConfig& cfg) {
    ProbeConfig pc;
    if (cfg.dataset) {
        pc.fixed_data = load_dataset(*cfg.dataset);
    } else if (cfg.task) {
        pc.task = *cfg.task;
    } else {
        throw std::invalid_argument("config: probe needs a task");
    }
    pc.dist = cfg.dist;
    pc.plan = cfg.plan;
    pc.sigma = cfg.sigma;
    pc.lambda = cfg.probe_lambda;
    pc.n_values = cfg.probe_n_values;
    pc.s_values = cfg.probe_s_values;
    pc.r_values = cfg.probe_r_values;
    pc.n_seeds = cfg.probe_seeds;
    pc.seed = cfg.seed;

    const auto table = risk_gap_probe(pc);
    std::vector<std::vector<json>> rows;
    for (const auto& r : table) rows.push_back({r.n, r.s, r.r, r.seed, num9(r.risk)});
    write_table((fs::path(cfg.out_dir) / "probe").string(), cfg.format,
                {"n", "s", "r", "seed", "risk"}, rows);
    std::cerr << "[orbitfeat] probe: " << rows.size() << " rows\n";
    return 0;
}

int cmd_features(const ExperimentConfig& cfg) {
    const Dataset data = resolve_data(cfg);
    const double sigma = cfg.sigma > 0.0 ? cfg.sigma : median_heuristic_sigma(data.x_train);
    FeaturePlan plan = cfg.plan;
    plan.layout = data.layout;
    const AnyFeatureMap map = plan.build(BaseKernel(sigma), cfg.dist, cfg.seed, data.x_train);
    const fs::path bin = fs::path(cfg.out_dir) / "features.bin";
    save_feature_map(map, bin.string());

    const Eigen::MatrixXd f = transform(map, data.x_train);
    if (cfg.format == "csv") {
        CsvWriter csv((fs::path(cfg.out_dir) / "features.csv").string());
        csv.matrix(f);
        csv.close();
    } else {
        json out = json::array();
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < f.cols(); ++j) row.push_back(num9(f(i, j)));
            out.push_back(row);
        }
        std::ofstream jf(fs::path(cfg.out_dir) / "features.json");
        jf << out.dump() << '\n';
    }
    std::cerr << "[orbitfeat] features: dim " << output_dim(map) << " saved to " << bin << "\n";
    return 0;
}

int cmd_selfcheck(const ExperimentConfig& cfg) {
    const auto results = run_selfcheck(cfg.seed);
    bool all_ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all_ok = all_ok && r.passed;
    }
    return all_ok ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"local group invariant kernel feature experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string format_override;
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    int threads = 0;

    const std::vector<std::string> commands = {"sweep", "bench", "features", "probe", "selfcheck"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        auto* copt = sub->add_option("--config", config_path, "experiment config json");
        if (name != "selfcheck") copt->required();
        sub->add_option("--seed", seed_override, "master seed override")
            ->each([&](const std::string&) { have_seed = true; });
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--threads", threads, "worker thread cap (speed only)");
        sub->add_option("--format", format_override, "output format override")
            ->check(CLI::IsMember({"csv", "json"}));
    }

    // argv-style copy; CLI11 parses in reverse
    std::vector<std::string> argv(args);
    try {
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    ExperimentConfig cfg;
    std::string command = app.get_subcommands().front()->get_name();
    try {
        if (!config_path.empty()) cfg = parse_config(load_json_file(config_path));
        if (!cfg.command.empty() && cfg.command != command)
            throw std::invalid_argument("config: file names command \"" + cfg.command +
                                        "\" but \"" + command + "\" was invoked");
        cfg.command = command;
        if (have_seed) cfg.seed = seed_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (!format_override.empty()) cfg.format = format_override;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    set_max_threads(threads);
    try {
        if (command != "selfcheck") {
            fs::create_directories(cfg.out_dir);
            write_resolved_config(cfg);
        }
        if (command == "sweep") return cmd_sweep(cfg);
        if (command == "bench") return cmd_bench(cfg);
        if (command == "probe") return cmd_probe(cfg);
        if (command == "features") return cmd_features(cfg);
        return cmd_selfcheck(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace orbitfeat
