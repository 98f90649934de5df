#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orbitfeat/distributions.hpp"
#include "orbitfeat/kernels.hpp"
#include "orbitfeat/learn.hpp"
#include "orbitfeat/tasks.hpp"

namespace orbitfeat {

/// Largest singular value by power iteration on a symmetric matrix,
/// relative tolerance 1e-6, at most 200 iterations; falls back to a full
/// eigendecomposition for n <= 500 when the iteration has not converged.
double spectral_norm(const Eigen::Ref<const Eigen::MatrixXd>& a, int max_iter = 200,
                     double tol = 1e-6);

struct SweepConfig {
    std::string axis = "s";          // "s" (curves per r) or "r" (fixed s)
    std::vector<int> values;         // ascending sweep values
    std::vector<int> r_values{20, 40};  // axis == "s"
    int fixed_s = 2048;              // axis == "r"
    int batch = 200;
    int replicates = 4;              // independent feature draws averaged per point
    int oracle_r = 70;
    bool oracle_exhaustive = false;
    double sigma = 0.0;              // 0: median heuristic on the batch
    GroupDistribution dist;
    SyntheticTask task;              // generates the data batch
    std::optional<Eigen::MatrixXd> fixed_batch;  // used instead of the generator when set
    InputLayout fixed_layout;        // layout of fixed_batch rows
    RFVariant variant = RFVariant::RealCosine;
    TransferMode transfer = TransferMode::DataSide;
    bool unitary_normalize = true;
    std::uint64_t seed = 0;
};

struct SweepPoint {
    int axis_value = 0;
    double spectral_err = 0.0;
    double frobenius_err = 0.0;
    int r = 0;
    std::uint64_t seed = 0;
};

struct ApproxErrorReport {
    std::vector<SweepPoint> points;
    double sigma_used = 0.0;
    int batch = 0;
    int oracle_r = 0;
};

/// Normalized kernel approximation error sweep: the reference Gram is the
/// group-averaged kernel on a frozen oracle pool, the estimate comes from
/// feature-map inner products at each sweep value. Within a replicate the
/// sweep values share one frozen template bank (respectively group pool), of
/// which each point uses a prefix; reported errors are means over the
/// replicates, as the single-draw norm errors are heavy tailed.
ApproxErrorReport approx_error_sweep(const SweepConfig& config);

struct BenchmarkConfig {
    SyntheticTask task;
    std::optional<Dataset> fixed_data;  // used for every seed when set
    std::vector<std::string> methods{"vanilla_rf", "lgika_rf"};
    std::vector<int> layer_counts{1};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    FeaturePlan plan;                // layout is overridden by the task
    GroupDistribution dist;
    double sigma = 0.0;              // 0: median heuristic on train
    CVGrid grid;
};

struct ResultRow {
    std::string method;
    int layers = 1;
    int fold = -1;  // -1: final train/test evaluation
    std::string metric;
    double value = 0.0;
    std::uint64_t seed = 0;
};

using ResultTable = std::vector<ResultRow>;

/// Runs each method through cross-validation plus a final train/test fit.
/// vanilla_* is the DeltaIdentity r=1 special case of the same code path.
ResultTable run_benchmark(const BenchmarkConfig& config);

struct ProbeConfig {
    SyntheticTask task;
    std::optional<Dataset> fixed_data;  // n axis truncates its training rows
    GroupDistribution dist;
    FeaturePlan plan;
    double sigma = 0.0;
    double lambda = 1e-4;
    std::vector<int> n_values;
    std::vector<int> s_values;
    std::vector<int> r_values;
    int n_seeds = 5;
    std::uint64_t seed = 0;
};

struct ProbeRow {
    int n = 0, s = 0, r = 0;
    std::uint64_t seed = 0;
    double risk = 0.0;
};

/// Test risk of the ridge ERM over (n, s, r); squared loss on standardized
/// targets clipped to [-3, 3]. r == 1 runs the vanilla (identity) pool.
std::vector<ProbeRow> risk_gap_probe(const ProbeConfig& config);

}  // namespace orbitfeat
