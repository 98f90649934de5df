#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "orbitfeat/distributions.hpp"
#include "orbitfeat/features.hpp"

namespace orbitfeat {

enum class TaskKind { Regression, Classification };

/// Linear predictor over a feature matrix, one weight column per target or
/// one-vs-rest class score.
struct RidgeModel {
    Eigen::MatrixXd weights;          // D x t
    Eigen::RowVectorXd intercepts;    // t
    double lambda = 0.0;
};

/// Regularized least squares: solves (F^T F + lambda I) W = F^T Y after
/// mean-centering features and targets; the intercept is recovered from the
/// means. Deterministic.
RidgeModel fit_ridge(const Eigen::Ref<const Eigen::MatrixXd>& features,
                     const Eigen::Ref<const Eigen::MatrixXd>& targets, double lambda);

Eigen::MatrixXd predict(const RidgeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Argmax over one-vs-rest scores; ties break toward the lowest class index.
Eigen::VectorXi classify(const RidgeModel& model,
                         const Eigen::Ref<const Eigen::MatrixXd>& features);

Eigen::MatrixXd one_hot(const Eigen::Ref<const Eigen::VectorXi>& labels, int n_classes);

double rmse(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
            const Eigen::Ref<const Eigen::MatrixXd>& actual);
double accuracy(const Eigen::Ref<const Eigen::VectorXi>& predicted,
                const Eigen::Ref<const Eigen::VectorXi>& actual);

/// Everything needed to build a feature map for one pipeline configuration.
/// Landmark-based methods draw landmarks from the training rows they are
/// given at build time.
struct FeaturePlan {
    enum class Method { RF, Nys };

    Method method = Method::RF;
    RFVariant variant = RFVariant::RealCosine;
    TransferMode transfer = TransferMode::DataSide;
    int s = 1024;       // RF template count
    int r = 1;          // group samples
    int landmarks = 256;
    double rank_tol = 1e-10;
    InputLayout layout;
    bool unitary_normalize = true;
    bool two_layer = false;
    double sigma2 = 1.0;  // multiplier on the layer-1 median-heuristic bandwidth
    int s2 = 1024;

    AnyFeatureMap build(const BaseKernel& base, const GroupDistribution& dist, std::uint64_t seed,
                        const Eigen::Ref<const Eigen::MatrixXd>& train_x) const;
};

struct CVGrid {
    std::vector<double> lambdas{1e-6, 1e-4, 1e-2, 1.0, 1e2};
    std::vector<double> sigmas;               // empty: keep the pipeline sigma
    std::vector<GroupDistribution> dists;     // empty: keep the pipeline dist
    int folds = 5;
    std::uint64_t seed = 0;
};

struct CVConfigPoint {
    double lambda = 0.0;
    double sigma = 0.0;
    GroupDistribution dist;
};

struct CVResult {
    CVConfigPoint best;
    int best_index = 0;
    std::vector<CVConfigPoint> configs;
    Eigen::MatrixXd fold_scores;  // configs x folds; RMSE or accuracy
    Eigen::VectorXd mean_scores;
};

/// Deterministic k-fold grid search. Feature maps are re-drawn per fold with
/// fold-derived seeds. Regression selects the lowest mean validation RMSE,
/// classification the highest mean validation accuracy.
CVResult cross_validate(const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& y, const CVGrid& grid,
                        const FeaturePlan& plan, double sigma,
                        const GroupDistribution& dist, TaskKind kind);

/// Shuffled fold ids (0..folds-1) for n rows, fixed by seed.
std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed);

}  // namespace orbitfeat
