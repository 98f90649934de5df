#include "orbitfeat/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "orbitfeat/parallel.hpp"
#include "orbitfeat/rng.hpp"

namespace orbitfeat {

namespace {
constexpr std::uint64_t kCurveStream = 17;
constexpr std::uint64_t kFinalFitStream = 23;
constexpr std::uint64_t kProbeStream = 29;
}  // namespace

double spectral_norm(const Eigen::Ref<const Eigen::MatrixXd>& a, int max_iter, double tol) {
    const Eigen::Index n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("spectral_norm: matrix must be square");
    if (n == 0) return 0.0;
    Rng rng(0x5eeded);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.gaussian();
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd w = a.selfadjointView<Eigen::Lower>() * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        lambda = v.dot(w);  // Rayleigh quotient, v is unit length
        if ((w - lambda * v).norm() <= tol * std::abs(lambda)) return std::abs(lambda);
        v = w / norm;
    }
    if (n <= 500) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
        return eig.eigenvalues().cwiseAbs().maxCoeff();
    }
    return std::abs(lambda);
}

namespace {

struct SweepContext {
    Eigen::MatrixXd x;
    Eigen::MatrixXd k_true;
    double k_frob = 0.0;
    double k_spec = 0.0;
    int oracle_pool = 0;
    InputLayout layout;
    BaseKernel base{1.0};
};

SweepContext sweep_context(const SweepConfig& config) {
    SweepContext ctx;
    if (config.fixed_batch) {
        const Eigen::Index rows = std::min<Eigen::Index>(config.batch, config.fixed_batch->rows());
        ctx.x = config.fixed_batch->topRows(rows);
        ctx.layout = config.fixed_layout;
    } else {
        SyntheticTask task = config.task;
        task.n_train = config.batch;
        task.n_test = 1;
        task.seed = derive_seed(config.seed, seed_stream::kBatch);
        const Dataset data = generate_task(task);
        ctx.x = data.x_train;
        ctx.layout = data.layout;
    }
    ctx.base = BaseKernel(config.sigma > 0.0 ? config.sigma : median_heuristic_sigma(ctx.x));

    std::vector<GroupElement> pool;
    if (config.oracle_exhaustive) {
        if (config.dist.family != GroupDistribution::Family::UniformPermutation)
            throw std::invalid_argument("sweep: exhaustive oracle needs a permutation group");
        pool = OracleKernel::enumerate_permutations(config.dist.n);
    } else {
        pool = sample(config.dist, config.oracle_r, derive_seed(config.seed, seed_stream::kOracleX));
    }
    ctx.oracle_pool = static_cast<int>(pool.size());
    const OracleKernel oracle = OracleKernel::with_pool(ctx.base, std::move(pool), ctx.layout,
                                                        config.unitary_normalize);
    ctx.k_true = oracle.gram(ctx.x, config.seed);
    ctx.k_frob = ctx.k_true.norm();
    ctx.k_spec = spectral_norm(ctx.k_true);
    return ctx;
}

struct ErrorPair {
    double spectral = 0.0;
    double frobenius = 0.0;
};

ErrorPair normalized_errors(const SweepContext& ctx, const Eigen::MatrixXd& k_hat) {
    const Eigen::MatrixXd diff = k_hat - ctx.k_true;
    return {spectral_norm(diff) / ctx.k_spec, diff.norm() / ctx.k_frob};
}

/// Gram of the prefix using the first s of s_max templates. Feature scaling
/// carries 1/s_max, so the prefix inner product is rescaled by s_max/s.
Eigen::MatrixXd prefix_gram(const Eigen::MatrixXd& features, RFVariant variant, int s, int s_max) {
    const Eigen::Index cols = variant == RFVariant::Complex ? 2 * s : s;
    const Eigen::MatrixXd fs = features.leftCols(cols);
    return (static_cast<double>(s_max) / static_cast<double>(s)) * (fs * fs.transpose());
}

void sweep_over_s(const SweepConfig& config, const SweepContext& ctx, ApproxErrorReport& report) {
    const int s_max = config.values.back();
    for (const int r : config.r_values) {
        const std::uint64_t curve_seed =
            derive_seed(config.seed, kCurveStream, static_cast<std::uint64_t>(r));
        std::vector<ErrorPair> sums(config.values.size());
        for (int rep = 0; rep < config.replicates; ++rep) {
            const RFFeatureMap map = RFFeatureMap::build(
                ctx.base, config.dist, s_max, r, ctx.layout, config.variant, config.transfer,
                derive_seed(curve_seed, static_cast<std::uint64_t>(rep)),
                config.unitary_normalize);
            const Eigen::MatrixXd features = map.transform(ctx.x);
            for (std::size_t vi = 0; vi < config.values.size(); ++vi) {
                const ErrorPair e = normalized_errors(
                    ctx, prefix_gram(features, config.variant, config.values[vi], s_max));
                sums[vi].spectral += e.spectral;
                sums[vi].frobenius += e.frobenius;
            }
        }
        for (std::size_t vi = 0; vi < config.values.size(); ++vi)
            report.points.push_back({config.values[vi],
                                     sums[vi].spectral / config.replicates,
                                     sums[vi].frobenius / config.replicates, r, curve_seed});
    }
}

void sweep_over_r(const SweepConfig& config, const SweepContext& ctx, ApproxErrorReport& report) {
    const int r_max = config.values.back();
    const int s = config.fixed_s;
    const Eigen::Index n = ctx.x.rows();
    const bool complex = config.variant == RFVariant::Complex;
    const std::uint64_t curve_seed = derive_seed(config.seed, kCurveStream);
    std::vector<ErrorPair> sums(config.values.size());

    for (int rep = 0; rep < config.replicates; ++rep) {
        const std::uint64_t map_seed = derive_seed(curve_seed, static_cast<std::uint64_t>(rep));
        const Eigen::MatrixXd templates = ctx.base.spectral_sample(
            ctx.layout.dim(), s, derive_seed(map_seed, seed_stream::kTemplates));
        Eigen::VectorXd phases(s);
        {
            Rng rng(derive_seed(map_seed, seed_stream::kPhases));
            for (int j = 0; j < s; ++j)
                phases[j] = rng.uniform(0.0, 6.283185307179586476925286766559);
        }
        const auto pool = sample(config.dist, r_max, derive_seed(map_seed, seed_stream::kGroupPool));

        Eigen::MatrixXd cos_acc = Eigen::MatrixXd::Zero(n, s);
        Eigen::MatrixXd sin_acc;
        if (complex) sin_acc = Eigen::MatrixXd::Zero(n, s);

        std::size_t next_value = 0;
        for (int k = 0; k < r_max; ++k) {
            parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
                const Eigen::VectorXd u =
                    apply(pool[static_cast<std::size_t>(k)],
                          ctx.x.row(static_cast<Eigen::Index>(i)).transpose(), ctx.layout,
                          config.unitary_normalize);
                const Eigen::VectorXd proj = templates * u;
                if (complex) {
                    cos_acc.row(static_cast<Eigen::Index>(i)) +=
                        proj.array().cos().matrix().transpose();
                    sin_acc.row(static_cast<Eigen::Index>(i)) +=
                        proj.array().sin().matrix().transpose();
                } else {
                    cos_acc.row(static_cast<Eigen::Index>(i)) +=
                        (proj + phases).array().cos().matrix().transpose();
                }
            });
            const int r = k + 1;
            if (next_value < config.values.size() && config.values[next_value] == r) {
                const double denom = static_cast<double>(s) * static_cast<double>(r) * r;
                Eigen::MatrixXd k_hat;
                if (complex) {
                    k_hat = (cos_acc * cos_acc.transpose() + sin_acc * sin_acc.transpose()) / denom;
                } else {
                    k_hat = 2.0 * (cos_acc * cos_acc.transpose()) / denom;
                }
                const ErrorPair e = normalized_errors(ctx, k_hat);
                sums[next_value].spectral += e.spectral;
                sums[next_value].frobenius += e.frobenius;
                ++next_value;
            }
        }
    }
    for (std::size_t vi = 0; vi < config.values.size(); ++vi)
        report.points.push_back({config.values[vi], sums[vi].spectral / config.replicates,
                                 sums[vi].frobenius / config.replicates, config.values[vi],
                                 curve_seed});
}

}  // namespace

ApproxErrorReport approx_error_sweep(const SweepConfig& config) {
    if (config.values.empty()) throw std::invalid_argument("sweep: no sweep values");
    if (!std::is_sorted(config.values.begin(), config.values.end()) ||
        std::adjacent_find(config.values.begin(), config.values.end()) != config.values.end())
        throw std::invalid_argument("sweep: values must be strictly ascending");
    if (config.values.front() < 1) throw std::invalid_argument("sweep: values must be positive");
    if (config.batch < 2) throw std::invalid_argument("sweep: batch too small");
    if (config.replicates < 1) throw std::invalid_argument("sweep: replicates must be >= 1");

    const SweepContext ctx = sweep_context(config);
    ApproxErrorReport report;
    report.sigma_used = ctx.base.sigma();
    report.batch = config.batch;
    report.oracle_r = ctx.oracle_pool;

    if (config.axis == "s") {
        if (config.r_values.empty()) throw std::invalid_argument("sweep: no r values");
        sweep_over_s(config, ctx, report);
    } else if (config.axis == "r") {
        sweep_over_r(config, ctx, report);
    } else {
        throw std::invalid_argument("sweep: axis must be \"s\" or \"r\"");
    }
    return report;
}

namespace {

struct MethodSpec {
    bool lgika = false;
    FeaturePlan::Method method = FeaturePlan::Method::RF;
};

MethodSpec parse_method(const std::string& name) {
    if (name == "vanilla_rf") return {false, FeaturePlan::Method::RF};
    if (name == "vanilla_nys") return {false, FeaturePlan::Method::Nys};
    if (name == "lgika_rf") return {true, FeaturePlan::Method::RF};
    if (name == "lgika_nys") return {true, FeaturePlan::Method::Nys};
    throw std::invalid_argument("unknown benchmark method: " + name);
}

}  // namespace

ResultTable run_benchmark(const BenchmarkConfig& config) {
    if (config.methods.empty()) throw std::invalid_argument("benchmark: no methods");
    ResultTable rows;
    for (const std::uint64_t seed : config.seeds) {
        SyntheticTask task = config.task;
        task.seed = seed;
        const Dataset data = config.fixed_data ? *config.fixed_data : generate_task(task);
        const double sigma =
            config.sigma > 0.0 ? config.sigma : median_heuristic_sigma(data.x_train);
        const char* cv_metric = data.kind == TaskKind::Regression ? "cv_rmse" : "cv_accuracy";
        const char* test_metric =
            data.kind == TaskKind::Regression ? "test_rmse" : "test_accuracy";

        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            const MethodSpec spec = parse_method(config.methods[mi]);
            const GroupDistribution dist =
                spec.lgika ? config.dist : GroupDistribution::delta_identity();
            for (const int layers : config.layer_counts) {
                if (layers != 1 && layers != 2)
                    throw std::invalid_argument("benchmark: layers must be 1 or 2");
                FeaturePlan plan = config.plan;
                plan.layout = data.layout;
                plan.method = spec.method;
                plan.r = spec.lgika ? config.plan.r : 1;
                plan.two_layer = layers == 2;

                CVGrid grid = config.grid;
                grid.seed = derive_seed(seed, mi, static_cast<std::uint64_t>(layers));
                const CVResult cv = cross_validate(data.x_train, data.y_train, grid, plan, sigma,
                                                   dist, data.kind);
                for (int f = 0; f < grid.folds; ++f)
                    rows.push_back({config.methods[mi], layers, f, cv_metric,
                                    cv.fold_scores(cv.best_index, f), seed});

                const BaseKernel base(cv.best.sigma);
                const AnyFeatureMap map = plan.build(
                    base, cv.best.dist, derive_seed(grid.seed, kFinalFitStream), data.x_train);
                const Eigen::MatrixXd f_train = transform(map, data.x_train);
                const Eigen::MatrixXd f_test = transform(map, data.x_test);
                const RidgeModel model = fit_ridge(f_train, data.y_train, cv.best.lambda);
                const double value =
                    data.kind == TaskKind::Regression
                        ? rmse(predict(model, f_test), data.y_test)
                        : accuracy(classify(model, f_test), data.labels_test);
                rows.push_back({config.methods[mi], layers, -1, test_metric, value, seed});
            }
        }
    }
    return rows;
}

std::vector<ProbeRow> risk_gap_probe(const ProbeConfig& config) {
    if (config.n_seeds < 1) throw std::invalid_argument("probe: n_seeds must be >= 1");
    std::vector<int> n_values = config.n_values;
    if (n_values.empty()) n_values = {config.task.n_train};
    std::vector<int> s_values = config.s_values;
    if (s_values.empty()) s_values = {config.plan.s};
    std::vector<int> r_values = config.r_values;
    if (r_values.empty()) r_values = {config.plan.r};

    std::vector<ProbeRow> rows;
    for (const int n : n_values) {
        for (int si = 0; si < config.n_seeds; ++si) {
            const std::uint64_t run_seed =
                derive_seed(config.seed, kProbeStream,
                            static_cast<std::uint64_t>(n) * 1000 + static_cast<std::uint64_t>(si));
            Dataset data;
            if (config.fixed_data) {
                data = *config.fixed_data;
                const Eigen::Index rows = std::min<Eigen::Index>(n, data.x_train.rows());
                data.x_train = Eigen::MatrixXd(data.x_train.topRows(rows));
                data.y_train = Eigen::MatrixXd(data.y_train.topRows(rows));
                if (data.labels_train.size() > 0)
                    data.labels_train = Eigen::VectorXi(data.labels_train.head(rows));
            } else {
                SyntheticTask task = config.task;
                task.n_train = n;
                task.seed = run_seed;
                data = generate_task(task);
            }
            if (data.kind == TaskKind::Classification && data.n_classes != 2)
                throw std::invalid_argument("probe: classification tasks must be binary");

            // standardized targets clipped to [-3, 3]; predictions likewise,
            // making the squared loss Lipschitz on its active range
            Eigen::MatrixXd y_train, y_test;
            if (data.kind == TaskKind::Regression) {
                const double mean = data.y_train.mean();
                const double sd = std::sqrt((data.y_train.array() - mean).square().mean());
                const double scale = sd > 0.0 ? sd : 1.0;
                y_train = ((data.y_train.array() - mean) / scale).cwiseMax(-3.0).cwiseMin(3.0);
                y_test = ((data.y_test.array() - mean) / scale).cwiseMax(-3.0).cwiseMin(3.0);
            } else {
                y_train = 2.0 * data.y_train.col(1).array() - 1.0;
                y_test = 2.0 * data.y_test.col(1).array() - 1.0;
            }
            const double sigma =
                config.sigma > 0.0 ? config.sigma : median_heuristic_sigma(data.x_train);
            const BaseKernel base(sigma);

            for (const int s : s_values) {
                for (const int r : r_values) {
                    FeaturePlan plan = config.plan;
                    plan.layout = data.layout;
                    plan.s = s;
                    plan.r = std::max(r, 1);
                    const GroupDistribution dist =
                        r <= 1 ? GroupDistribution::delta_identity() : config.dist;
                    const std::uint64_t map_seed =
                        derive_seed(run_seed, static_cast<std::uint64_t>(s),
                                    static_cast<std::uint64_t>(r));
                    const AnyFeatureMap map = plan.build(base, dist, map_seed, data.x_train);
                    const RidgeModel model =
                        fit_ridge(transform(map, data.x_train), y_train, config.lambda);
                    const Eigen::MatrixXd pred =
                        predict(model, transform(map, data.x_test)).cwiseMax(-3.0).cwiseMin(3.0);
                    rows.push_back(
                        {n, s, r, run_seed, (pred - y_test).squaredNorm() /
                                                static_cast<double>(y_test.rows())});
                }
            }
        }
    }
    return rows;
}

}  // namespace orbitfeat
