#include "orbitfeat/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "orbitfeat/csv.hpp"

namespace orbitfeat {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw std::invalid_argument("config: " + ctx + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!ok.count(item.key()))
            throw std::invalid_argument("config: unknown key \"" + item.key() + "\" in " + ctx);
}

GroupDistribution parse_distribution(const json& j, const std::string& ctx) {
    if (!j.is_object() || !j.contains("family"))
        throw std::invalid_argument("config: " + ctx + " needs a \"family\"");
    const std::string family = j.at("family").get<std::string>();
    if (family == "delta_identity") {
        check_keys(j, ctx, {"family"});
    } else if (family == "uniform_permutation") {
        check_keys(j, ctx, {"family", "n"});
    } else if (family == "von_mises_rotation") {
        check_keys(j, ctx, {"family", "kappa", "mode"});
    } else if (family == "gaussian_translation") {
        check_keys(j, ctx, {"family", "sigma"});
    } else if (family == "log_normal_scaling") {
        check_keys(j, ctx, {"family", "mu", "sigma"});
    } else if (family == "product_affine") {
        check_keys(j, ctx, {"family", "components"});
        for (const auto& c : j.at("components")) parse_distribution(c, ctx + ".components");
    } else {
        throw std::invalid_argument("config: unknown distribution family \"" + family + "\"");
    }
    return j.get<GroupDistribution>();
}

InputLayout parse_layout(const json& j, const std::string& ctx) {
    if (!j.is_object() || !j.contains("shape"))
        throw std::invalid_argument("config: " + ctx + " needs a \"shape\"");
    const std::string shape = j.at("shape").get<std::string>();
    if (shape == "vector") {
        check_keys(j, ctx, {"shape", "d"});
    } else if (shape == "image") {
        check_keys(j, ctx, {"shape", "height", "width"});
    } else if (shape == "symmetric_matrix") {
        check_keys(j, ctx, {"shape", "n"});
    } else {
        throw std::invalid_argument("config: unknown layout shape \"" + shape + "\"");
    }
    return j.get<InputLayout>();
}

FeaturePlan parse_features(const json& j) {
    check_keys(j, "features",
               {"method", "variant", "s", "r", "transfer_mode", "rank_tol", "landmarks",
                "unitary_normalize", "two_layer", "sigma2", "s2"});
    FeaturePlan plan;
    const std::string method = j.value("method", std::string("rf"));
    if (method == "rf") {
        plan.method = FeaturePlan::Method::RF;
    } else if (method == "nys") {
        plan.method = FeaturePlan::Method::Nys;
    } else {
        throw std::invalid_argument("config: features.method must be \"rf\" or \"nys\"");
    }
    const std::string variant = j.value("variant", std::string("real_cosine"));
    if (variant == "real_cosine") {
        plan.variant = RFVariant::RealCosine;
    } else if (variant == "complex") {
        plan.variant = RFVariant::Complex;
    } else {
        throw std::invalid_argument("config: features.variant must be \"real_cosine\" or \"complex\"");
    }
    const std::string transfer = j.value("transfer_mode", std::string("data_side"));
    if (transfer == "data_side") {
        plan.transfer = TransferMode::DataSide;
    } else if (transfer == "template_side") {
        plan.transfer = TransferMode::TemplateSide;
    } else {
        throw std::invalid_argument(
            "config: features.transfer_mode must be \"data_side\" or \"template_side\"");
    }
    plan.s = j.value("s", plan.s);
    plan.r = j.value("r", plan.r);
    plan.rank_tol = j.value("rank_tol", plan.rank_tol);
    plan.landmarks = j.value("landmarks", plan.landmarks);
    plan.unitary_normalize = j.value("unitary_normalize", plan.unitary_normalize);
    plan.two_layer = j.value("two_layer", plan.two_layer);
    plan.sigma2 = j.value("sigma2", plan.sigma2);
    plan.s2 = j.value("s2", plan.s2);
    if (plan.s < 1 || plan.r < 1 || plan.s2 < 1 || plan.landmarks < 1)
        throw std::invalid_argument("config: features counts must be >= 1");
    if (!(plan.rank_tol > 0.0))
        throw std::invalid_argument("config: features.rank_tol must be positive");
    return plan;
}

TaskKind parse_kind(const std::string& kind) {
    if (kind == "regression") return TaskKind::Regression;
    if (kind == "classification") return TaskKind::Classification;
    throw std::invalid_argument("config: kind must be \"regression\" or \"classification\"");
}

void parse_task(const json& j, ExperimentConfig& cfg) {
    if (j.contains("generator")) {
        check_keys(j, "task",
                   {"generator", "matrix_order", "noise", "image_size", "n_classes", "angle_range",
                    "pixel_noise", "scale_sigma", "trans_sigma", "train", "test"});
        cfg.task = j.get<SyntheticTask>();
        return;
    }
    if (j.contains("dataset")) {
        check_keys(j, "task", {"dataset"});
        const json& d = j.at("dataset");
        check_keys(d, "task.dataset", {"train", "test", "layout", "kind", "header", "n_classes"});
        DatasetConfig ds;
        ds.train_path = d.at("train").get<std::string>();
        ds.test_path = d.value("test", std::string());
        ds.layout = parse_layout(d.at("layout"), "task.dataset.layout");
        ds.kind = parse_kind(d.value("kind", std::string("regression")));
        ds.has_header = d.value("header", false);
        ds.n_classes = d.value("n_classes", 0);
        cfg.dataset = ds;
        return;
    }
    throw std::invalid_argument("config: task needs either \"generator\" or \"dataset\"");
}

template <typename T>
std::vector<T> int_list(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw std::invalid_argument("config: " + ctx + " must be an array");
    std::vector<T> out;
    for (const auto& v : j) out.push_back(v.get<T>());
    return out;
}

}  // namespace

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid json: ") + e.what());
    }
    return j;
}

ExperimentConfig parse_config(const json& j) {
    check_keys(j, "config",
               {"command", "seed", "kernel", "distribution", "features", "task", "cv", "sweep",
                "bench", "probe", "output"});
    ExperimentConfig cfg;
    cfg.command = j.value("command", std::string());
    cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));

    if (j.contains("kernel")) {
        check_keys(j.at("kernel"), "kernel", {"sigma"});
        cfg.sigma = j.at("kernel").value("sigma", 0.0);
        if (cfg.sigma < 0.0) throw std::invalid_argument("config: kernel.sigma must be >= 0");
    }
    if (j.contains("distribution"))
        cfg.dist = parse_distribution(j.at("distribution"), "distribution");
    if (j.contains("features")) cfg.plan = parse_features(j.at("features"));
    if (j.contains("task")) parse_task(j.at("task"), cfg);

    if (j.contains("cv")) {
        const json& c = j.at("cv");
        check_keys(c, "cv", {"lambdas", "sigmas", "folds", "distributions"});
        if (c.contains("lambdas")) cfg.grid.lambdas = int_list<double>(c.at("lambdas"), "cv.lambdas");
        if (c.contains("sigmas")) cfg.grid.sigmas = int_list<double>(c.at("sigmas"), "cv.sigmas");
        cfg.grid.folds = c.value("folds", cfg.grid.folds);
        if (c.contains("distributions")) {
            cfg.grid.dists.clear();
            for (const auto& d : c.at("distributions"))
                cfg.grid.dists.push_back(parse_distribution(d, "cv.distributions"));
        }
        if (cfg.grid.lambdas.empty()) throw std::invalid_argument("config: cv.lambdas is empty");
        if (cfg.grid.folds < 2) throw std::invalid_argument("config: cv.folds must be >= 2");
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, "sweep",
                   {"axis", "values", "r_values", "fixed_s", "batch", "replicates", "oracle_r",
                    "oracle_exhaustive"});
        cfg.sweep_axis = s.value("axis", cfg.sweep_axis);
        if (s.contains("values")) cfg.sweep_values = int_list<int>(s.at("values"), "sweep.values");
        if (s.contains("r_values"))
            cfg.sweep_r_values = int_list<int>(s.at("r_values"), "sweep.r_values");
        cfg.sweep_fixed_s = s.value("fixed_s", cfg.sweep_fixed_s);
        cfg.sweep_batch = s.value("batch", cfg.sweep_batch);
        cfg.sweep_replicates = s.value("replicates", cfg.sweep_replicates);
        cfg.oracle_r = s.value("oracle_r", cfg.oracle_r);
        cfg.oracle_exhaustive = s.value("oracle_exhaustive", cfg.oracle_exhaustive);
    }

    if (j.contains("bench")) {
        const json& b = j.at("bench");
        check_keys(b, "bench", {"methods", "layers", "seeds"});
        if (b.contains("methods")) {
            cfg.methods.clear();
            for (const auto& m : b.at("methods")) cfg.methods.push_back(m.get<std::string>());
        }
        if (b.contains("layers")) cfg.layer_counts = int_list<int>(b.at("layers"), "bench.layers");
        if (b.contains("seeds"))
            cfg.bench_seeds = int_list<std::uint64_t>(b.at("seeds"), "bench.seeds");
    }

    if (j.contains("probe")) {
        const json& p = j.at("probe");
        check_keys(p, "probe", {"n_values", "s_values", "r_values", "seeds", "lambda"});
        if (p.contains("n_values")) cfg.probe_n_values = int_list<int>(p.at("n_values"), "probe.n_values");
        if (p.contains("s_values")) cfg.probe_s_values = int_list<int>(p.at("s_values"), "probe.s_values");
        if (p.contains("r_values")) cfg.probe_r_values = int_list<int>(p.at("r_values"), "probe.r_values");
        cfg.probe_seeds = p.value("seeds", cfg.probe_seeds);
        cfg.probe_lambda = p.value("lambda", cfg.probe_lambda);
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        check_keys(o, "output", {"dir", "format"});
        cfg.out_dir = o.value("dir", cfg.out_dir);
        cfg.format = o.value("format", cfg.format);
    }
    if (cfg.format != "csv" && cfg.format != "json")
        throw std::invalid_argument("config: output.format must be \"csv\" or \"json\"");
    return cfg;
}

nlohmann::json ExperimentConfig::resolved() const {
    json features = {{"method", plan.method == FeaturePlan::Method::RF ? "rf" : "nys"},
                     {"variant", plan.variant == RFVariant::RealCosine ? "real_cosine" : "complex"},
                     {"s", plan.s},
                     {"r", plan.r},
                     {"transfer_mode",
                      plan.transfer == TransferMode::DataSide ? "data_side" : "template_side"},
                     {"rank_tol", plan.rank_tol},
                     {"landmarks", plan.landmarks},
                     {"unitary_normalize", plan.unitary_normalize},
                     {"two_layer", plan.two_layer},
                     {"sigma2", plan.sigma2},
                     {"s2", plan.s2}};
    json task_json;
    if (task) {
        task_json = *task;
    } else if (dataset) {
        json layout_json = dataset->layout;
        task_json = {{"dataset",
                      {{"train", dataset->train_path},
                       {"test", dataset->test_path},
                       {"layout", layout_json},
                       {"kind", dataset->kind == TaskKind::Regression ? "regression"
                                                                      : "classification"},
                       {"header", dataset->has_header},
                       {"n_classes", dataset->n_classes}}}};
    }
    json cv = {{"lambdas", grid.lambdas},
               {"sigmas", grid.sigmas},
               {"folds", grid.folds},
               {"distributions", grid.dists}};
    return json{{"command", command},
                {"seed", seed},
                {"kernel", {{"sigma", sigma}}},
                {"distribution", dist},
                {"features", features},
                {"task", task_json},
                {"cv", cv},
                {"sweep",
                 {{"axis", sweep_axis},
                  {"values", sweep_values},
                  {"r_values", sweep_r_values},
                  {"fixed_s", sweep_fixed_s},
                  {"batch", sweep_batch},
                  {"replicates", sweep_replicates},
                  {"oracle_r", oracle_r},
                  {"oracle_exhaustive", oracle_exhaustive}}},
                {"bench", {{"methods", methods}, {"layers", layer_counts}, {"seeds", bench_seeds}}},
                {"probe",
                 {{"n_values", probe_n_values},
                  {"s_values", probe_s_values},
                  {"r_values", probe_r_values},
                  {"seeds", probe_seeds},
                  {"lambda", probe_lambda}}},
                {"output", {{"dir", out_dir}, {"format", format}}}};
}

Dataset load_dataset(const DatasetConfig& cfg) {
    Dataset out;
    out.layout = cfg.layout;
    out.kind = cfg.kind;

    Eigen::MatrixXd train = read_csv(cfg.train_path, cfg.has_header);
    Eigen::VectorXd y_train;
    split_xy(train, out.x_train, y_train);
    if (out.x_train.cols() != cfg.layout.dim())
        throw std::invalid_argument("dataset: train columns do not match layout");

    Eigen::VectorXd y_test;
    if (!cfg.test_path.empty()) {
        Eigen::MatrixXd test = read_csv(cfg.test_path, cfg.has_header);
        split_xy(test, out.x_test, y_test);
        if (out.x_test.cols() != cfg.layout.dim())
            throw std::invalid_argument("dataset: test columns do not match layout");
    } else {
        out.x_test = out.x_train;
        y_test = y_train;
    }

    if (cfg.kind == TaskKind::Regression) {
        out.y_train = y_train;
        out.y_test = y_test;
        return out;
    }
    auto to_labels = [](const Eigen::VectorXd& y) {
        Eigen::VectorXi labels(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            labels[i] = static_cast<int>(std::lround(y[i]));
            if (labels[i] < 0) throw std::invalid_argument("dataset: negative class label");
        }
        return labels;
    };
    out.labels_train = to_labels(y_train);
    out.labels_test = to_labels(y_test);
    int n_classes = cfg.n_classes;
    if (n_classes == 0)
        n_classes = std::max(out.labels_train.maxCoeff(), out.labels_test.maxCoeff()) + 1;
    out.n_classes = n_classes;
    out.y_train = one_hot(out.labels_train, n_classes);
    out.y_test = one_hot(out.labels_test, n_classes);
    return out;
}

}  // namespace orbitfeat
