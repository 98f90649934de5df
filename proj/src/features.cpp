#include "orbitfeat/features.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <utility>

#include "orbitfeat/parallel.hpp"
#include "orbitfeat/rng.hpp"

namespace orbitfeat {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::VectorXd draw_phases(int s, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd b(s);
    for (int i = 0; i < s; ++i) b[i] = rng.uniform(0.0, kTwoPi);
    return b;
}

std::vector<GroupElement> draw_pool(const GroupDistribution& dist, int r, TransferMode transfer,
                                    std::uint64_t seed, bool auto_symmetrize) {
    auto pool = sample(dist, r, derive_seed(seed, seed_stream::kGroupPool));
    if (transfer == TransferMode::TemplateSide && !dist.is_symmetric()) {
        if (!auto_symmetrize)
            throw std::invalid_argument(
                "template-side transfer needs a symmetric distribution or a symmetrized pool");
        std::cerr << "[orbitfeat] template-side transfer with asymmetric q: "
                     "symmetrizing the group pool (r doubles to "
                  << 2 * pool.size() << ")\n";
        pool = symmetrize_pool(pool);
    }
    return pool;
}

Eigen::MatrixXd rowwise_apply(const std::vector<GroupElement>& pool,
                              const Eigen::Ref<const Eigen::VectorXd>& x,
                              const InputLayout& layout, bool unitary) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(pool.size()), x.size());
    for (std::size_t k = 0; k < pool.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = apply(pool[k], x, layout, unitary);
    return out;
}

Eigen::MatrixXd transform_rows(const Eigen::Ref<const Eigen::MatrixXd>& x, int out_dim,
                               const std::function<Eigen::VectorXd(
                                   const Eigen::Ref<const Eigen::VectorXd>&)>& one) {
    Eigen::MatrixXd out(x.rows(), out_dim);
    parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t i) {
        out.row(static_cast<Eigen::Index>(i)) =
            one(x.row(static_cast<Eigen::Index>(i)).transpose());
    });
    return out;
}

}  // namespace

RFFeatureMap RFFeatureMap::build(const BaseKernel& base, const GroupDistribution& dist, int s,
                                 int r, InputLayout layout, RFVariant variant,
                                 TransferMode transfer, std::uint64_t seed, bool unitary_normalize,
                                 bool auto_symmetrize) {
    if (s < 1 || r < 1) throw std::invalid_argument("build_rf: s and r must be >= 1");
    auto pool = draw_pool(dist, r, transfer, seed, auto_symmetrize);
    return build_with_pool(base, std::move(pool), s, layout, variant, transfer, seed,
                           unitary_normalize);
}

RFFeatureMap RFFeatureMap::build_with_pool(const BaseKernel& base, std::vector<GroupElement> pool,
                                           int s, InputLayout layout, RFVariant variant,
                                           TransferMode transfer, std::uint64_t seed,
                                           bool unitary_normalize) {
    if (pool.empty()) throw std::invalid_argument("build_rf: empty group pool");
    RFFeatureMap m;
    m.templates_ = base.spectral_sample(layout.dim(), s, derive_seed(seed, seed_stream::kTemplates));
    if (variant == RFVariant::RealCosine)
        m.phases_ = draw_phases(s, derive_seed(seed, seed_stream::kPhases));
    m.pool_ = std::move(pool);
    m.variant_ = variant;
    m.transfer_ = transfer;
    m.layout_ = layout;
    m.sigma_ = base.sigma();
    m.unitary_ = unitary_normalize;
    if (transfer == TransferMode::TemplateSide) m.precompute_transfer();
    return m;
}

void RFFeatureMap::precompute_transfer() {
    // <w, g x> = <g^-1 w, x> for the unitary action, so the group work moves
    // into the frozen template bank once, not into every transform call.
    transferred_.resize(pool_.size());
    parallel_for(pool_.size(), [&](std::size_t k) {
        const GroupElement inv = invert(pool_[k]);
        Eigen::MatrixXd t(templates_.rows(), templates_.cols());
        for (Eigen::Index j = 0; j < templates_.rows(); ++j)
            t.row(j) = apply(inv, templates_.row(j).transpose(), layout_, unitary_);
        transferred_[k] = std::move(t);
    });
}

int RFFeatureMap::output_dim() const {
    const int s = static_cast<int>(templates_.rows());
    return variant_ == RFVariant::Complex ? 2 * s : s;
}

Eigen::VectorXd RFFeatureMap::transform_one(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != layout_.dim())
        throw std::invalid_argument("transform_rf: input dimension mismatch");
    const auto s = templates_.rows();
    const auto r = static_cast<Eigen::Index>(pool_.size());

    // proj(k, j) = <w_j, g_k x>, via either side of the transfer identity
    Eigen::MatrixXd proj(r, s);
    if (transfer_ == TransferMode::DataSide) {
        proj.noalias() = rowwise_apply(pool_, x, layout_, unitary_) * templates_.transpose();
    } else {
        for (Eigen::Index k = 0; k < r; ++k)
            proj.row(k).noalias() = (transferred_[static_cast<std::size_t>(k)] * x).transpose();
    }

    if (variant_ == RFVariant::RealCosine) {
        const double scale = std::sqrt(2.0 / static_cast<double>(s)) / static_cast<double>(r);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(s);
        for (Eigen::Index k = 0; k < r; ++k)
            out += (proj.row(k).transpose() + phases_).array().cos().matrix();
        return scale * out;
    }

    const double scale = 1.0 / (static_cast<double>(r) * std::sqrt(static_cast<double>(s)));
    Eigen::VectorXd out(2 * s);
    Eigen::ArrayXd re = Eigen::ArrayXd::Zero(s), im = Eigen::ArrayXd::Zero(s);
    for (Eigen::Index k = 0; k < r; ++k) {
        re += proj.row(k).transpose().array().cos();
        im -= proj.row(k).transpose().array().sin();
    }
    for (Eigen::Index j = 0; j < s; ++j) {
        out[2 * j] = scale * re[j];
        out[2 * j + 1] = scale * im[j];
    }
    return out;
}

Eigen::MatrixXd RFFeatureMap::transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    if (x.cols() != layout_.dim())
        throw std::invalid_argument("transform_rf: input dimension mismatch");
    return transform_rows(x, output_dim(),
                          [this](const Eigen::Ref<const Eigen::VectorXd>& row) {
                              return transform_one(row);
                          });
}

NysFeatureMap NysFeatureMap::build_from_data(const BaseKernel& base, const GroupDistribution& dist,
                                             const Eigen::Ref<const Eigen::MatrixXd>& x, int m,
                                             int r, InputLayout layout, TransferMode transfer,
                                             double rank_tol, std::uint64_t seed,
                                             bool unitary_normalize, bool auto_symmetrize) {
    if (m < 1 || m > x.rows())
        throw std::invalid_argument("build_nys: need 1 <= m <= n landmarks");
    // uniform sample of m distinct rows
    Rng rng(derive_seed(seed, seed_stream::kLandmarks));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
    for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<Eigen::Index>(rng.below(idx.size() - static_cast<std::size_t>(i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    Eigen::MatrixXd z(m, x.cols());
    for (int i = 0; i < m; ++i) z.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
    return build_explicit(base, dist, std::move(z), r, layout, transfer, rank_tol, seed,
                          unitary_normalize, auto_symmetrize);
}

NysFeatureMap NysFeatureMap::build_explicit(const BaseKernel& base, const GroupDistribution& dist,
                                            Eigen::MatrixXd landmarks, int r, InputLayout layout,
                                            TransferMode transfer, double rank_tol,
                                            std::uint64_t seed, bool unitary_normalize,
                                            bool auto_symmetrize) {
    if (r < 1) throw std::invalid_argument("build_nys: r must be >= 1");
    auto pool = draw_pool(dist, r, transfer, seed, auto_symmetrize);
    return build_with_pool(base, std::move(pool), std::move(landmarks), layout, transfer, rank_tol,
                           unitary_normalize);
}

NysFeatureMap NysFeatureMap::build_with_pool(const BaseKernel& base,
                                             std::vector<GroupElement> pool,
                                             Eigen::MatrixXd landmarks, InputLayout layout,
                                             TransferMode transfer, double rank_tol,
                                             bool unitary_normalize) {
    if (pool.empty()) throw std::invalid_argument("build_nys: empty group pool");
    if (landmarks.rows() < 1) throw std::invalid_argument("build_nys: no landmarks");
    if (landmarks.cols() != layout.dim())
        throw std::invalid_argument("build_nys: landmark dimension mismatch");
    if (!(rank_tol > 0.0)) throw std::invalid_argument("build_nys: rank_tol must be positive");
    NysFeatureMap m;
    m.base_ = base;
    m.landmarks_ = std::move(landmarks);
    m.pool_ = std::move(pool);
    m.transfer_ = transfer;
    m.layout_ = layout;
    m.unitary_ = unitary_normalize;
    m.factorize(rank_tol);
    if (transfer == TransferMode::TemplateSide) m.precompute_transfer();
    return m;
}

void NysFeatureMap::factorize(double rank_tol) {
    rank_tol_ = rank_tol;
    const Eigen::MatrixXd kzz = base_.gram(landmarks_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kzz);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("build_nys: eigendecomposition failed");
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double lmax = ev.maxCoeff();
    const double cutoff = rank_tol * lmax;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > cutoff && ev[i] > 0.0) keep.push_back(i);
    if (keep.empty())
        throw std::runtime_error("build_nys: degenerate landmarks, no eigenvalue above cutoff");
    factor_.resize(static_cast<Eigen::Index>(keep.size()), landmarks_.rows());
    for (std::size_t i = 0; i < keep.size(); ++i)
        factor_.row(static_cast<Eigen::Index>(i)) =
            eig.eigenvectors().col(keep[i]).transpose() / std::sqrt(ev[keep[i]]);
}

void NysFeatureMap::precompute_transfer() {
    // k(g x, z) = k(x, g^-1 z): move the pool onto the landmarks once.
    transferred_landmarks_.resize(pool_.size());
    parallel_for(pool_.size(), [&](std::size_t k) {
        const GroupElement inv = invert(pool_[k]);
        Eigen::MatrixXd z(landmarks_.rows(), landmarks_.cols());
        for (Eigen::Index j = 0; j < landmarks_.rows(); ++j)
            z.row(j) = apply(inv, landmarks_.row(j).transpose(), layout_, unitary_);
        transferred_landmarks_[k] = std::move(z);
    });
}

Eigen::VectorXd NysFeatureMap::transform_one(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != layout_.dim())
        throw std::invalid_argument("transform_nys: input dimension mismatch");
    const Eigen::MatrixXd xrow = x.transpose();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(landmarks_.rows());
    if (transfer_ == TransferMode::DataSide) {
        const Eigen::MatrixXd tx = rowwise_apply(pool_, x, layout_, unitary_);
        acc = base_.cross_gram(landmarks_, tx).rowwise().sum();
    } else {
        for (const auto& z : transferred_landmarks_)
            acc += base_.cross_gram(z, xrow).col(0);
    }
    return (factor_ * acc) / static_cast<double>(pool_.size());
}

Eigen::MatrixXd NysFeatureMap::transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    if (x.cols() != layout_.dim())
        throw std::invalid_argument("transform_nys: input dimension mismatch");
    return transform_rows(x, output_dim(),
                          [this](const Eigen::Ref<const Eigen::VectorXd>& row) {
                              return transform_one(row);
                          });
}

TwoLayerMap TwoLayerMap::build(Layer1 layer1, double sigma2, int s2, std::uint64_t seed) {
    if (s2 < 1) throw std::invalid_argument("build_two_layer: s2 must be >= 1");
    const int d1 = std::visit([](const auto& m) { return m.output_dim(); }, layer1);
    TwoLayerMap m;
    m.layer1_ = std::move(layer1);
    m.sigma2_ = sigma2;
    const BaseKernel hyper(sigma2);
    const std::uint64_t s = derive_seed(seed, seed_stream::kLayer2);
    m.templates2_ = hyper.spectral_sample(d1, s2, derive_seed(s, seed_stream::kTemplates));
    m.phases2_ = draw_phases(s2, derive_seed(s, seed_stream::kPhases));
    return m;
}

Eigen::VectorXd TwoLayerMap::transform_one(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::VectorXd f1 =
        std::visit([&](const auto& m) { return m.transform_one(x); }, layer1_);
    const double scale = std::sqrt(2.0 / static_cast<double>(templates2_.rows()));
    return scale * ((templates2_ * f1 + phases2_).array().cos()).matrix();
}

Eigen::MatrixXd TwoLayerMap::transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    return transform_rows(x, output_dim(),
                          [this](const Eigen::Ref<const Eigen::VectorXd>& row) {
                              return transform_one(row);
                          });
}

Eigen::MatrixXd transform(const AnyFeatureMap& map, const Eigen::Ref<const Eigen::MatrixXd>& x) {
    return std::visit([&](const auto& m) { return m.transform(x); }, map);
}

int output_dim(const AnyFeatureMap& map) {
    return std::visit([](const auto& m) { return m.output_dim(); }, map);
}

}  // namespace orbitfeat
