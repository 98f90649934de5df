#include "orbitfeat/learn.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "orbitfeat/rng.hpp"

namespace orbitfeat {

RidgeModel fit_ridge(const Eigen::Ref<const Eigen::MatrixXd>& features,
                     const Eigen::Ref<const Eigen::MatrixXd>& targets, double lambda) {
    if (features.rows() < 1 || features.rows() != targets.rows())
        throw std::invalid_argument("fit_ridge: row mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("fit_ridge: lambda must be positive");
    if (!features.allFinite() || !targets.allFinite())
        throw std::invalid_argument("fit_ridge: non-finite inputs");

    const Eigen::RowVectorXd fmean = features.colwise().mean();
    const Eigen::RowVectorXd ymean = targets.colwise().mean();
    const Eigen::MatrixXd fc = features.rowwise() - fmean;
    const Eigen::MatrixXd yc = targets.rowwise() - ymean;

    Eigen::MatrixXd normal = fc.transpose() * fc;
    normal.diagonal().array() += lambda;

    RidgeModel model;
    model.lambda = lambda;
    model.weights = Eigen::LDLT<Eigen::MatrixXd>(normal).solve(fc.transpose() * yc);
    model.intercepts = ymean - fmean * model.weights;
    return model;
}

Eigen::MatrixXd predict(const RidgeModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& features) {
    if (features.cols() != model.weights.rows())
        throw std::invalid_argument("predict: feature dimension mismatch");
    return (features * model.weights).rowwise() + model.intercepts;
}

Eigen::VectorXi classify(const RidgeModel& model,
                         const Eigen::Ref<const Eigen::MatrixXd>& features) {
    const Eigen::MatrixXd scores = predict(model, features);
    Eigen::VectorXi labels(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < scores.cols(); ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

Eigen::MatrixXd one_hot(const Eigen::Ref<const Eigen::VectorXi>& labels, int n_classes) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(labels.size(), n_classes);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw std::invalid_argument("one_hot: label out of range");
        y(i, labels[i]) = 1.0;
    }
    return y;
}

double rmse(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
            const Eigen::Ref<const Eigen::MatrixXd>& actual) {
    if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols())
        throw std::invalid_argument("rmse: shape mismatch");
    return std::sqrt((predicted - actual).squaredNorm() /
                     static_cast<double>(predicted.size()));
}

double accuracy(const Eigen::Ref<const Eigen::VectorXi>& predicted,
                const Eigen::Ref<const Eigen::VectorXi>& actual) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("accuracy: size mismatch");
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < predicted.size(); ++i)
        if (predicted[i] == actual[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

AnyFeatureMap FeaturePlan::build(const BaseKernel& base, const GroupDistribution& dist,
                                 std::uint64_t seed,
                                 const Eigen::Ref<const Eigen::MatrixXd>& train_x) const {
    TwoLayerMap::Layer1 layer1;
    if (method == Method::RF) {
        layer1 = RFFeatureMap::build(base, dist, s, r, layout, variant, transfer, seed,
                                     unitary_normalize);
    } else {
        const int m = std::min<int>(landmarks, static_cast<int>(train_x.rows()));
        layer1 = NysFeatureMap::build_from_data(base, dist, train_x, m, r, layout, transfer,
                                                rank_tol, seed, unitary_normalize);
    }
    if (two_layer) {
        // sigma2 scales the median-heuristic bandwidth of the layer-1
        // training embeddings
        const Eigen::MatrixXd f1 = std::visit(
            [&](const auto& m) { return m.transform(train_x); }, layer1);
        return TwoLayerMap::build(std::move(layer1), sigma2 * median_heuristic_sigma(f1), s2,
                                  seed);
    }
    if (std::holds_alternative<RFFeatureMap>(layer1))
        return std::get<RFFeatureMap>(std::move(layer1));
    return std::get<NysFeatureMap>(std::move(layer1));
}

std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("fold_assignment: folds must be >= 2");
    if (n < folds) throw std::invalid_argument("fold_assignment: fewer rows than folds");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    Rng rng(derive_seed(seed, seed_stream::kFolds));
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        fold[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return fold;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::Ref<const Eigen::MatrixXd>& m,
                          const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Eigen::VectorXi argmax_labels(const Eigen::Ref<const Eigen::MatrixXd>& y) {
    Eigen::VectorXi labels(y.rows());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < y.cols(); ++c)
            if (y(i, c) > y(i, best)) best = c;
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace

CVResult cross_validate(const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& y, const CVGrid& grid,
                        const FeaturePlan& plan, double sigma, const GroupDistribution& dist,
                        TaskKind kind) {
    if (grid.lambdas.empty()) throw std::invalid_argument("cross_validate: empty lambda grid");
    const std::vector<double> sigmas = grid.sigmas.empty() ? std::vector<double>{sigma} : grid.sigmas;
    const std::vector<GroupDistribution> dists =
        grid.dists.empty() ? std::vector<GroupDistribution>{dist} : grid.dists;

    const auto folds = fold_assignment(x.rows(), grid.folds, grid.seed);
    CVResult result;
    for (const double sg : sigmas)
        for (const auto& dq : dists)
            for (const double lm : grid.lambdas)
                result.configs.push_back({lm, sg, dq});

    result.fold_scores.resize(static_cast<Eigen::Index>(result.configs.size()), grid.folds);

    // lambda varies fastest, so one feature build per (sigma, dist, fold)
    // serves the whole lambda sweep.
    const std::size_t n_lambda = grid.lambdas.size();
    for (std::size_t outer = 0; outer < result.configs.size(); outer += n_lambda) {
        const auto& head = result.configs[outer];
        const BaseKernel base(head.sigma);
        for (int f = 0; f < grid.folds; ++f) {
            std::vector<Eigen::Index> train_rows, val_rows;
            for (Eigen::Index i = 0; i < x.rows(); ++i)
                (folds[static_cast<std::size_t>(i)] == f ? val_rows : train_rows).push_back(i);
            if (train_rows.empty() || val_rows.empty())
                throw std::invalid_argument("cross_validate: degenerate fold");
            const Eigen::MatrixXd xtr = take_rows(x, train_rows);
            const Eigen::MatrixXd ytr = take_rows(y, train_rows);
            const Eigen::MatrixXd xva = take_rows(x, val_rows);
            const Eigen::MatrixXd yva = take_rows(y, val_rows);

            const std::uint64_t fold_seed =
                derive_seed(grid.seed, outer, static_cast<std::uint64_t>(f));
            const AnyFeatureMap map = plan.build(base, head.dist, fold_seed, xtr);
            const Eigen::MatrixXd ftr = transform(map, xtr);
            const Eigen::MatrixXd fva = transform(map, xva);

            for (std::size_t l = 0; l < n_lambda; ++l) {
                const auto row = static_cast<Eigen::Index>(outer + l);
                const RidgeModel model = fit_ridge(ftr, ytr, result.configs[outer + l].lambda);
                if (kind == TaskKind::Regression) {
                    result.fold_scores(row, f) = rmse(predict(model, fva), yva);
                } else {
                    result.fold_scores(row, f) = accuracy(classify(model, fva), argmax_labels(yva));
                }
            }
        }
    }

    result.mean_scores = result.fold_scores.rowwise().mean();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < result.mean_scores.size(); ++i) {
        const bool better = kind == TaskKind::Regression
                                ? result.mean_scores[i] < result.mean_scores[best]
                                : result.mean_scores[i] > result.mean_scores[best];
        if (better) best = i;
    }
    result.best_index = static_cast<int>(best);
    result.best = result.configs[static_cast<std::size_t>(best)];
    return result;
}

}  // namespace orbitfeat
