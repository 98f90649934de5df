#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <variant>
#include <vector>

#include "orbitfeat/distributions.hpp"
#include "orbitfeat/groups.hpp"
#include "orbitfeat/kernels.hpp"

namespace orbitfeat {

enum class RFVariant {
    RealCosine,  // sqrt(2/s) cos(<w,x> + b), b ~ Unif(0, 2*pi)
    Complex,     // e^{-i<w,x>} / sqrt(s), stored as interleaved re/im
};

enum class TransferMode {
    DataSide,      // group elements act on the data points
    TemplateSide,  // inverse elements act on the frozen templates/landmarks
};

/// Random Fourier feature map with a frozen template bank and group pool.
/// The inner product of two transformed points estimates the group-averaged
/// kernel: <psi(x), psi(y)> ~= (1/r^2) sum_{k,l} k(g_k x, g_l y).
/// Immutable after build; transform is pure and deterministic.
class RFFeatureMap {
public:
    static RFFeatureMap build(const BaseKernel& base, const GroupDistribution& dist, int s, int r,
                              InputLayout layout, RFVariant variant = RFVariant::RealCosine,
                              TransferMode transfer = TransferMode::DataSide,
                              std::uint64_t seed = 0, bool unitary_normalize = true,
                              bool auto_symmetrize = true);

    /// Build against an explicit group pool (e.g. an exhaustively enumerated
    /// finite group) instead of sampling one.
    static RFFeatureMap build_with_pool(const BaseKernel& base, std::vector<GroupElement> pool,
                                        int s, InputLayout layout,
                                        RFVariant variant = RFVariant::RealCosine,
                                        TransferMode transfer = TransferMode::DataSide,
                                        std::uint64_t seed = 0, bool unitary_normalize = true);

    int input_dim() const { return layout_.dim(); }
    int output_dim() const;

    Eigen::VectorXd transform_one(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

    const Eigen::MatrixXd& templates() const { return templates_; }
    const Eigen::VectorXd& phases() const { return phases_; }
    const std::vector<GroupElement>& group_pool() const { return pool_; }
    RFVariant variant() const { return variant_; }
    TransferMode transfer_mode() const { return transfer_; }
    const InputLayout& layout() const { return layout_; }
    double sigma() const { return sigma_; }
    bool unitary_normalize() const { return unitary_; }

    RFFeatureMap() = default;  // empty; use build()

private:
    friend struct FeatureMapCodec;
    void precompute_transfer();

    Eigen::MatrixXd templates_;  // s x d
    Eigen::VectorXd phases_;     // s (RealCosine only)
    std::vector<GroupElement> pool_;
    std::vector<Eigen::MatrixXd> transferred_;  // per pool element, s x d
    RFVariant variant_ = RFVariant::RealCosine;
    TransferMode transfer_ = TransferMode::DataSide;
    InputLayout layout_;
    double sigma_ = 1.0;
    bool unitary_ = true;
};

/// Nystrom feature map: psi(x) = (1/r) L sum_k K_{Z, g_k x} with
/// L^T L = K_{Z,Z}^+ truncated at rank_tol relative to the top eigenvalue.
class NysFeatureMap {
public:
    /// Landmarks are m uniformly sampled rows of X (without replacement).
    static NysFeatureMap build_from_data(const BaseKernel& base, const GroupDistribution& dist,
                                         const Eigen::Ref<const Eigen::MatrixXd>& x, int m, int r,
                                         InputLayout layout,
                                         TransferMode transfer = TransferMode::DataSide,
                                         double rank_tol = 1e-10, std::uint64_t seed = 0,
                                         bool unitary_normalize = true,
                                         bool auto_symmetrize = true);

    static NysFeatureMap build_explicit(const BaseKernel& base, const GroupDistribution& dist,
                                        Eigen::MatrixXd landmarks, int r, InputLayout layout,
                                        TransferMode transfer = TransferMode::DataSide,
                                        double rank_tol = 1e-10, std::uint64_t seed = 0,
                                        bool unitary_normalize = true, bool auto_symmetrize = true);

    static NysFeatureMap build_with_pool(const BaseKernel& base, std::vector<GroupElement> pool,
                                         Eigen::MatrixXd landmarks, InputLayout layout,
                                         TransferMode transfer = TransferMode::DataSide,
                                         double rank_tol = 1e-10, bool unitary_normalize = true);

    int input_dim() const { return layout_.dim(); }
    int output_dim() const { return static_cast<int>(factor_.rows()); }

    Eigen::VectorXd transform_one(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

    const Eigen::MatrixXd& landmarks() const { return landmarks_; }
    const Eigen::MatrixXd& factor() const { return factor_; }
    const std::vector<GroupElement>& group_pool() const { return pool_; }
    TransferMode transfer_mode() const { return transfer_; }
    const InputLayout& layout() const { return layout_; }
    double sigma() const { return base_.sigma(); }
    double rank_tol() const { return rank_tol_; }
    bool unitary_normalize() const { return unitary_; }

private:
    friend struct FeatureMapCodec;
    NysFeatureMap() : base_(1.0) {}
    void factorize(double rank_tol);
    void precompute_transfer();

    BaseKernel base_;
    Eigen::MatrixXd landmarks_;  // m x d
    Eigen::MatrixXd factor_;     // rank x m
    std::vector<GroupElement> pool_;
    std::vector<Eigen::MatrixXd> transferred_landmarks_;  // per pool element, m x d
    TransferMode transfer_ = TransferMode::DataSide;
    InputLayout layout_;
    double rank_tol_ = 1e-10;
    bool unitary_ = true;
};

/// A plain (no group averaging) random Fourier layer on top of a first-layer
/// map; approximates a Gaussian hyperkernel over the layer-1 embeddings.
class TwoLayerMap {
public:
    using Layer1 = std::variant<RFFeatureMap, NysFeatureMap>;

    static TwoLayerMap build(Layer1 layer1, double sigma2, int s2, std::uint64_t seed);

    int output_dim() const { return static_cast<int>(templates2_.rows()); }

    Eigen::VectorXd transform_one(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

    const Layer1& layer1() const { return layer1_; }
    double sigma2() const { return sigma2_; }
    const Eigen::MatrixXd& templates2() const { return templates2_; }
    const Eigen::VectorXd& phases2() const { return phases2_; }

private:
    friend struct FeatureMapCodec;
    TwoLayerMap() = default;

    Layer1 layer1_;
    Eigen::MatrixXd templates2_;  // s2 x dim(layer1)
    Eigen::VectorXd phases2_;     // s2
    double sigma2_ = 1.0;
};

using AnyFeatureMap = std::variant<RFFeatureMap, NysFeatureMap, TwoLayerMap>;

Eigen::MatrixXd transform(const AnyFeatureMap& map, const Eigen::Ref<const Eigen::MatrixXd>& x);
int output_dim(const AnyFeatureMap& map);

}  // namespace orbitfeat
