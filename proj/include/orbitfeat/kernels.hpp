#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "orbitfeat/distributions.hpp"
#include "orbitfeat/groups.hpp"

namespace orbitfeat {

/// Shift-invariant Gaussian kernel k(x,y) = exp(-||x-y||^2 / (2 sigma^2)).
class BaseKernel {
public:
    explicit BaseKernel(double sigma);

    double sigma() const { return sigma_; }

    double eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) const;

    double eval_sqdist(double sqdist) const;

    /// Symmetric Gram matrix of pairwise evaluations over the rows of X.
    Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

    /// K[i][j] = k(x_i, z_j).
    Eigen::MatrixXd cross_gram(const Eigen::Ref<const Eigen::MatrixXd>& x,
                               const Eigen::Ref<const Eigen::MatrixXd>& z) const;

    /// s i.i.d. draws from the kernel's Fourier spectral density, one
    /// template per row; each coordinate is Normal(0, 1/sigma^2).
    Eigen::MatrixXd spectral_sample(int d, int s, std::uint64_t seed) const;

private:
    double sigma_;
};

/// sigma = sqrt(median ||x_i - x_j||^2 / 2) over row pairs of X.
double median_heuristic_sigma(const Eigen::Ref<const Eigen::MatrixXd>& x);

enum class OracleStatistic { VStat, UStat };

/// Monte Carlo ground truth for the group-averaged kernel: the double
/// expectation of the base kernel over q-distributed group draws applied to
/// each argument. VStat draws independent pools for the two arguments; UStat
/// shares a single pool and averages the off-diagonal pairs. Uniform
/// permutation distributions of order <= 7 are enumerated exhaustively by
/// default, which makes the evaluation exactly group invariant.
class OracleKernel {
public:
    OracleKernel(BaseKernel base, GroupDistribution dist, int r_oracle, InputLayout layout,
                 OracleStatistic statistic = OracleStatistic::VStat,
                 bool unitary_normalize = true);

    /// Evaluation against a frozen pool shared by both arguments and all
    /// data points (the estimator the feature maps actually target).
    static OracleKernel with_pool(BaseKernel base, std::vector<GroupElement> pool,
                                  InputLayout layout, bool unitary_normalize = true);

    /// All n! permutations of {0..n-1}; n <= 7.
    static std::vector<GroupElement> enumerate_permutations(int n);

    bool exhaustive() const { return fixed_pool_.has_value(); }
    void set_exhaustive_enumeration(bool on);
    /// Effective pool size per argument: the frozen pool size when one is
    /// set, otherwise the configured sample count.
    int r_oracle() const { return fixed_pool_ ? static_cast<int>(fixed_pool_->size()) : r_; }
    const InputLayout& layout() const { return layout_; }
    const BaseKernel& base() const { return base_; }

    double eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y, std::uint64_t seed) const;

    /// Both statistics from one shared pool: (all-pairs average, i != j
    /// average). Their gap is bounded by 1/r for the Gaussian base kernel.
    std::pair<double, double> eval_uv(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const Eigen::Ref<const Eigen::VectorXd>& y,
                                      std::uint64_t seed) const;

    /// VStat Gram over the rows of X with one pool per data point (the
    /// matrix is then a Gram of empirical mean embeddings, hence PSD).
    /// Deterministic per-pair seeding; parallel and serial runs agree
    /// bit-exactly.
    Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& x, std::uint64_t seed) const;

private:
    std::vector<GroupElement> pool_for(std::uint64_t seed) const;
    Eigen::MatrixXd transformed(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const std::vector<GroupElement>& pool) const;

    BaseKernel base_;
    GroupDistribution dist_;
    int r_;
    InputLayout layout_;
    OracleStatistic statistic_;
    bool unitary_;
    std::optional<std::vector<GroupElement>> fixed_pool_;
};

}  // namespace orbitfeat
