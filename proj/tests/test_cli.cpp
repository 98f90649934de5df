#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "orbitfeat/config.hpp"
#include "orbitfeat/csv.hpp"
#include "orbitfeat/serialize.hpp"

using namespace orbitfeat;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "orbitfeat_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_json(const fs::path& dir, const std::string& name, const nlohmann::json& j) {
    const fs::path p = dir / name;
    std::ofstream f(p);
    f << j.dump(2);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

nlohmann::json sweep_config() {
    return {
        {"seed", 11},
        {"distribution", {{"family", "uniform_permutation"}, {"n", 6}}},
        {"task",
         {{"generator", "perm_invariant_regression"}, {"matrix_order", 6}, {"train", 30},
          {"test", 5}}},
        {"sweep",
         {{"axis", "s"}, {"values", {32, 64, 128}}, {"r_values", {4, 8}}, {"batch", 30},
          {"replicates", 2}, {"oracle_r", 16}}},
        {"output", {{"dir", "unset"}, {"format", "csv"}}},
    };
}

nlohmann::json bench_config() {
    return {
        {"seed", 3},
        {"distribution", {{"family", "uniform_permutation"}, {"n", 5}}},
        {"features", {{"method", "rf"}, {"s", 64}, {"r", 4}}},
        {"task",
         {{"generator", "perm_invariant_regression"}, {"matrix_order", 5}, {"train", 40},
          {"test", 20}}},
        {"cv", {{"lambdas", {1e-4, 1e-2}}, {"folds", 3}}},
        {"bench", {{"methods", {"vanilla_rf", "lgika_rf"}}, {"layers", {1}}, {"seeds", {1, 2}}}},
        {"output", {{"dir", "unset"}}},
    };
}

}  // namespace

TEST_CASE("unknown config keys are rejected with exit code 1") {
    const auto dir = fresh_dir("badkeys");
    auto cfg = sweep_config();
    cfg["mystery"] = 1;
    const auto path = write_json(dir, "cfg.json", cfg);
    CHECK(run_cli({"sweep", "--config", path.string(), "--out", (dir / "out").string()}) == 1);

    auto cfg2 = sweep_config();
    cfg2["sweep"]["typo_values"] = {1, 2};
    const auto path2 = write_json(dir, "cfg2.json", cfg2);
    CHECK(run_cli({"sweep", "--config", path2.string(), "--out", (dir / "out").string()}) == 1);
}

TEST_CASE("missing or malformed config files give exit code 1") {
    const auto dir = fresh_dir("missing");
    CHECK(run_cli({"sweep", "--config", (dir / "nope.json").string()}) == 1);
    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK(run_cli({"sweep", "--config", broken.string()}) == 1);
    // config command mismatch
    auto cfg = sweep_config();
    cfg["command"] = "bench";
    const auto path = write_json(dir, "cfg.json", cfg);
    CHECK(run_cli({"sweep", "--config", path.string()}) == 1);
}

TEST_CASE("a missing dataset path is a runtime error with exit code 2") {
    const auto dir = fresh_dir("runtimeerr");
    nlohmann::json cfg = {
        {"seed", 1},
        {"task",
         {{"dataset",
           {{"train", (dir / "absent.csv").string()},
            {"layout", {{"shape", "vector"}, {"d", 3}}},
            {"kind", "regression"}}}}},
        {"output", {{"dir", (dir / "out").string()}}},
    };
    const auto path = write_json(dir, "cfg.json", cfg);
    CHECK(run_cli({"features", "--config", path.string()}) == 2);
}

TEST_CASE("sweep writes the expected artifacts and is byte-identical across reruns") {
    const auto dir = fresh_dir("sweepdet");
    const auto path = write_json(dir, "cfg.json", sweep_config());
    const auto out = dir / "run";
    REQUIRE(run_cli({"sweep", "--config", path.string(), "--out", out.string()}) == 0);
    const std::string csv1 = slurp(out / "sweep.csv");
    const std::string resolved1 = slurp(out / "resolved_config.json");

    // rerun the identical command (different thread cap) into the same place
    REQUIRE(run_cli({"sweep", "--config", path.string(), "--out", out.string(),
                     "--threads", "3"}) == 0);
    CHECK(csv1 == slurp(out / "sweep.csv"));
    CHECK(resolved1 == slurp(out / "resolved_config.json"));

    // header plus 2 curves x 3 values
    int lines = 0;
    for (char c : csv1) lines += c == '\n';
    CHECK(lines == 7);
    CHECK(csv1.rfind("axis_value,spectral_err,frobenius_err,r,seed", 0) == 0);
}

TEST_CASE("the resolved config re-runs to identical outputs") {
    const auto dir = fresh_dir("roundtrip");
    const auto path = write_json(dir, "cfg.json", sweep_config());
    const auto out1 = dir / "run1";
    REQUIRE(run_cli({"sweep", "--config", path.string(), "--out", out1.string()}) == 0);
    const auto out2 = dir / "run2";
    REQUIRE(run_cli({"sweep", "--config", (out1 / "resolved_config.json").string(), "--out",
                     out2.string()}) == 0);
    CHECK(slurp(out1 / "sweep.csv") == slurp(out2 / "sweep.csv"));
}

TEST_CASE("seed override changes results deterministically") {
    const auto dir = fresh_dir("seeds");
    const auto path = write_json(dir, "cfg.json", sweep_config());
    const auto out1 = dir / "a";
    const auto out2 = dir / "b";
    const auto out3 = dir / "c";
    REQUIRE(run_cli({"sweep", "--config", path.string(), "--out", out1.string()}) == 0);
    REQUIRE(run_cli({"sweep", "--config", path.string(), "--out", out2.string(), "--seed",
                     "99"}) == 0);
    REQUIRE(run_cli({"sweep", "--config", path.string(), "--out", out3.string(), "--seed",
                     "99"}) == 0);
    CHECK(slurp(out1 / "sweep.csv") != slurp(out2 / "sweep.csv"));
    CHECK(slurp(out2 / "sweep.csv") == slurp(out3 / "sweep.csv"));
}

TEST_CASE("bench emits the documented csv schema deterministically") {
    const auto dir = fresh_dir("bench");
    const auto path = write_json(dir, "cfg.json", bench_config());
    const auto out1 = dir / "r1";
    const auto out2 = dir / "r2";
    REQUIRE(run_cli({"bench", "--config", path.string(), "--out", out1.string()}) == 0);
    REQUIRE(run_cli({"bench", "--config", path.string(), "--out", out2.string(),
                     "--threads", "2"}) == 0);
    const std::string csv = slurp(out1 / "results.csv");
    CHECK(csv == slurp(out2 / "results.csv"));
    CHECK(csv.rfind("method,layer,fold,metric,value,seed", 0) == 0);
    CHECK(csv.find("lgika_rf") != std::string::npos);
    CHECK(csv.find("test_rmse") != std::string::npos);
}

TEST_CASE("json output format writes arrays of row objects") {
    const auto dir = fresh_dir("jsonfmt");
    const auto path = write_json(dir, "cfg.json", sweep_config());
    const auto out = dir / "out";
    REQUIRE(run_cli({"sweep", "--config", path.string(), "--out", out.string(), "--format",
                     "json"}) == 0);
    const auto rows = nlohmann::json::parse(slurp(out / "sweep.json"));
    REQUIRE(rows.is_array());
    CHECK(rows.size() == 6);
    CHECK(rows[0].contains("axis_value"));
    CHECK(rows[0].contains("frobenius_err"));
}

TEST_CASE("features command builds, saves, and transforms reloadably") {
    const auto dir = fresh_dir("features");
    nlohmann::json cfg = {
        {"seed", 5},
        {"kernel", {{"sigma", 3.0}}},
        {"distribution", {{"family", "uniform_permutation"}, {"n", 5}}},
        {"features", {{"method", "rf"}, {"s", 32}, {"r", 4}}},
        {"task",
         {{"generator", "perm_invariant_regression"}, {"matrix_order", 5}, {"train", 12},
          {"test", 3}}},
        {"output", {{"dir", (dir / "out").string()}}},
    };
    const auto path = write_json(dir, "cfg.json", cfg);
    REQUIRE(run_cli({"features", "--config", path.string()}) == 0);
    CHECK(fs::exists(dir / "out" / "features.bin"));
    const auto map = load_feature_map((dir / "out" / "features.bin").string());
    CHECK(output_dim(map) == 32);

    const Eigen::MatrixXd table = read_csv((dir / "out" / "features.csv").string(), false);
    CHECK(table.rows() == 12);
    CHECK(table.cols() == 32);
}

TEST_CASE("features command consumes csv datasets") {
    const auto dir = fresh_dir("csvdata");
    {
        CsvWriter w((dir / "train.csv").string());
        w.header({"a", "b", "c", "d", "y"});
        Rng rng(8);
        for (int i = 0; i < 10; ++i) {
            std::vector<std::string> cells;
            for (int j = 0; j < 4; ++j) cells.push_back(format_g9(rng.gaussian()));
            cells.push_back(format_g9(rng.gaussian()));
            w.line(cells);
        }
        w.close();
    }
    nlohmann::json cfg = {
        {"seed", 2},
        {"kernel", {{"sigma", 2.0}}},
        {"features", {{"method", "nys"}, {"landmarks", 8}, {"r", 1}}},
        {"task",
         {{"dataset",
           {{"train", (dir / "train.csv").string()},
            {"layout", {{"shape", "vector"}, {"d", 4}}},
            {"kind", "regression"},
            {"header", true}}}}},
        {"output", {{"dir", (dir / "out").string()}}},
    };
    const auto path = write_json(dir, "cfg.json", cfg);
    REQUIRE(run_cli({"features", "--config", path.string()}) == 0);
    const Eigen::MatrixXd f = read_csv((dir / "out" / "features.csv").string(), false);
    CHECK(f.rows() == 10);
    CHECK(f.cols() == 8);
}

TEST_CASE("probe command writes its table") {
    const auto dir = fresh_dir("probe");
    nlohmann::json cfg = {
        {"seed", 4},
        {"distribution", {{"family", "uniform_permutation"}, {"n", 5}}},
        {"features", {{"method", "rf"}, {"s", 64}, {"r", 4}}},
        {"task",
         {{"generator", "perm_invariant_regression"}, {"matrix_order", 5}, {"train", 40},
          {"test", 30}}},
        {"probe", {{"s_values", {1, 64}}, {"r_values", {1, 4}}, {"seeds", 2}}},
        {"output", {{"dir", (dir / "out").string()}}},
    };
    const auto path = write_json(dir, "cfg.json", cfg);
    REQUIRE(run_cli({"probe", "--config", path.string()}) == 0);
    const std::string csv = slurp(dir / "out" / "probe.csv");
    CHECK(csv.rfind("n,s,r,seed,risk", 0) == 0);
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + 2 * 2 * 2);
}

TEST_CASE("selfcheck works without a config file") {
    CHECK(run_cli({"selfcheck"}) == 0);
}

TEST_CASE("numbers in csv output carry at most nine significant digits") {
    CHECK(format_g9(0.123456789123456789) == "0.123456789");
    CHECK(format_g9(1.0) == "1");
    CHECK(format_g9(-2.5e-7) == "-2.5e-07");
}
