#include "orbitfeat/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "orbitfeat/parallel.hpp"
#include "orbitfeat/rng.hpp"

namespace orbitfeat {

BaseKernel::BaseKernel(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("BaseKernel: sigma must be positive");
}

double BaseKernel::eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) const {
    if (x.size() != y.size()) throw std::invalid_argument("BaseKernel::eval: length mismatch");
    return eval_sqdist((x - y).squaredNorm());
}

double BaseKernel::eval_sqdist(double sqdist) const {
    return std::exp(-sqdist / (2.0 * sigma_ * sigma_));
}

Eigen::MatrixXd BaseKernel::gram(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    if (x.rows() == 0) throw std::invalid_argument("gram: empty data matrix");
    return cross_gram(x, x);
}

Eigen::MatrixXd BaseKernel::cross_gram(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                       const Eigen::Ref<const Eigen::MatrixXd>& z) const {
    if (x.cols() != z.cols()) throw std::invalid_argument("cross_gram: dimension mismatch");
    const Eigen::VectorXd xn = x.rowwise().squaredNorm();
    const Eigen::VectorXd zn = z.rowwise().squaredNorm();
    Eigen::MatrixXd k = -2.0 * (x * z.transpose());
    k.colwise() += xn;
    k.rowwise() += zn.transpose();
    return (-k / (2.0 * sigma_ * sigma_)).array().exp();
}

Eigen::MatrixXd BaseKernel::spectral_sample(int d, int s, std::uint64_t seed) const {
    if (s < 1 || d < 1) throw std::invalid_argument("spectral_sample: bad shape");
    Rng rng(seed);
    Eigen::MatrixXd w(s, d);
    const double inv_sigma = 1.0 / sigma_;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < d; ++j) w(i, j) = inv_sigma * rng.gaussian();
    return w;
}

double median_heuristic_sigma(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    const Eigen::Index n = x.rows();
    if (n < 2) throw std::invalid_argument("median_heuristic_sigma: need at least two rows");
    std::vector<double> sq;
    sq.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) sq.push_back((x.row(i) - x.row(j)).squaredNorm());
    const auto mid = sq.begin() + static_cast<std::ptrdiff_t>(sq.size() / 2);
    std::nth_element(sq.begin(), mid, sq.end());
    return std::sqrt(*mid / 2.0);
}

OracleKernel::OracleKernel(BaseKernel base, GroupDistribution dist, int r_oracle,
                           InputLayout layout, OracleStatistic statistic, bool unitary_normalize)
    : base_(base),
      dist_(std::move(dist)),
      r_(r_oracle),
      layout_(layout),
      statistic_(statistic),
      unitary_(unitary_normalize) {
    if (r_ < 1) throw std::invalid_argument("OracleKernel: r_oracle must be >= 1");
    if (statistic_ == OracleStatistic::UStat && r_ < 2)
        throw std::invalid_argument("OracleKernel: UStat needs r_oracle >= 2");
    set_exhaustive_enumeration(dist_.family == GroupDistribution::Family::UniformPermutation &&
                               dist_.n <= 7);
}

OracleKernel OracleKernel::with_pool(BaseKernel base, std::vector<GroupElement> pool,
                                     InputLayout layout, bool unitary_normalize) {
    if (pool.empty()) throw std::invalid_argument("OracleKernel: empty pool");
    OracleKernel o(base, GroupDistribution::delta_identity(), static_cast<int>(pool.size()),
                   layout, OracleStatistic::VStat, unitary_normalize);
    o.fixed_pool_ = std::move(pool);
    return o;
}

std::vector<GroupElement> OracleKernel::enumerate_permutations(int n) {
    if (n < 1 || n > 7) throw std::invalid_argument("enumerate_permutations: n must be in 1..7");
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::vector<GroupElement> out;
    do {
        out.push_back(GroupElement::permutation(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

void OracleKernel::set_exhaustive_enumeration(bool on) {
    if (on) {
        if (dist_.family != GroupDistribution::Family::UniformPermutation || dist_.n > 7)
            throw std::invalid_argument("exhaustive mode needs a uniform permutation group, n <= 7");
        fixed_pool_ = enumerate_permutations(dist_.n);
    } else {
        fixed_pool_.reset();
    }
}

std::vector<GroupElement> OracleKernel::pool_for(std::uint64_t seed) const {
    if (fixed_pool_) return *fixed_pool_;
    return sample(dist_, r_, seed);
}

Eigen::MatrixXd OracleKernel::transformed(const Eigen::Ref<const Eigen::VectorXd>& x,
                                          const std::vector<GroupElement>& pool) const {
    Eigen::MatrixXd t(static_cast<Eigen::Index>(pool.size()), x.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        t.row(static_cast<Eigen::Index>(i)) = apply(pool[i], x, layout_, unitary_);
    return t;
}

double OracleKernel::eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y, std::uint64_t seed) const {
    if (x.size() != layout_.dim() || y.size() != layout_.dim())
        throw std::invalid_argument("OracleKernel::eval: layout mismatch");
    if (statistic_ == OracleStatistic::UStat) return eval_uv(x, y, seed).second;
    const auto px = pool_for(derive_seed(seed, seed_stream::kOracleX));
    const auto py = fixed_pool_ ? px : pool_for(derive_seed(seed, seed_stream::kOracleY));
    return base_.cross_gram(transformed(x, px), transformed(y, py)).mean();
}

std::pair<double, double> OracleKernel::eval_uv(const Eigen::Ref<const Eigen::VectorXd>& x,
                                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                                std::uint64_t seed) const {
    const auto pool = pool_for(derive_seed(seed, seed_stream::kOracleX));
    const auto r = static_cast<Eigen::Index>(pool.size());
    if (r < 2) throw std::invalid_argument("eval_uv: needs a pool of at least two elements");
    const Eigen::MatrixXd k = base_.cross_gram(transformed(x, pool), transformed(y, pool));
    const double total = k.sum();
    const double diag = k.diagonal().sum();
    const double vstat = total / static_cast<double>(r * r);
    const double ustat = (total - diag) / static_cast<double>(r * (r - 1));
    return {vstat, ustat};
}

Eigen::MatrixXd OracleKernel::gram(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   std::uint64_t seed) const {
    const Eigen::Index n = x.rows();
    if (n == 0) throw std::invalid_argument("OracleKernel::gram: empty data matrix");
    if (x.cols() != layout_.dim())
        throw std::invalid_argument("OracleKernel::gram: layout mismatch");

    // One pool per data point (a single shared pool when frozen), so K is an
    // inner-product matrix of empirical mean embeddings.
    std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        const auto pool = pool_for(derive_seed(seed, seed_stream::kOracleX, i));
        blocks[i] = transformed(x.row(static_cast<Eigen::Index>(i)).transpose(), pool);
    });

    Eigen::MatrixXd k(n, n);
    const std::size_t npairs = static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2;
    parallel_for(npairs, [&](std::size_t flat) {
        // flat -> (i, j) with i <= j over the upper triangle
        std::size_t i = 0;
        std::size_t row_len = static_cast<std::size_t>(n);
        std::size_t rem = flat;
        while (rem >= row_len) {
            rem -= row_len;
            --row_len;
            ++i;
        }
        const std::size_t j = i + rem;
        const double v = base_.cross_gram(blocks[i], blocks[j]).mean();
        k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        k(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    });
    return k;
}

}  // namespace orbitfeat
