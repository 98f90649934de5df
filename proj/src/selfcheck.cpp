#include "orbitfeat/selfcheck.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "orbitfeat/csv.hpp"
#include "orbitfeat/features.hpp"
#include "orbitfeat/kernels.hpp"
#include "orbitfeat/rng.hpp"

namespace orbitfeat {

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
    return m;
}

SelfCheckResult check(const std::string& name, bool ok, double value, double bound) {
    return {name, ok, "value " + format_g9(value) + " bound " + format_g9(bound)};
}

}  // namespace

std::vector<SelfCheckResult> run_selfcheck(std::uint64_t seed) {
    std::vector<SelfCheckResult> out;
    Rng rng(derive_seed(seed, 0xC0FFEE));

    {  // permutations preserve inner products exactly
        double worst = 0.0;
        const auto layout = InputLayout::vector(12);
        for (int t = 0; t < 40; ++t) {
            const auto pool = sample(GroupDistribution::uniform_permutation(12), 1, rng.next_u64());
            const Eigen::VectorXd x = random_matrix(rng, 12, 1);
            const Eigen::VectorXd y = random_matrix(rng, 12, 1);
            const double lhs = apply(pool[0], x, layout).dot(apply(pool[0], y, layout));
            worst = std::max(worst, std::abs(lhs - x.dot(y)));
        }
        out.push_back(check("permutation_unitarity", worst <= 1e-12, worst, 1e-12));
    }

    {  // exhaustive S3 oracle is exactly invariant
        const auto layout = InputLayout::vector(3);
        const OracleKernel oracle(BaseKernel(1.0), GroupDistribution::uniform_permutation(3), 6,
                                  layout);
        const auto group = OracleKernel::enumerate_permutations(3);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const Eigen::VectorXd x = random_matrix(rng, 3, 1);
            const Eigen::VectorXd y = random_matrix(rng, 3, 1);
            const double ref = oracle.eval(x, y, 7);
            for (const auto& g : group)
                worst = std::max(worst, std::abs(oracle.eval(apply(g, x, layout), y, 7) - ref));
        }
        out.push_back(check("exhaustive_s3_invariance", worst <= 1e-12, worst, 1e-12));
    }

    {  // delta distribution reduces the oracle to the base kernel
        const auto layout = InputLayout::vector(6);
        const BaseKernel base(1.3);
        const OracleKernel oracle(base, GroupDistribution::delta_identity(), 8, layout);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const Eigen::VectorXd x = random_matrix(rng, 6, 1);
            const Eigen::VectorXd y = random_matrix(rng, 6, 1);
            worst = std::max(worst, std::abs(oracle.eval(x, y, 3) - base.eval(x, y)));
        }
        out.push_back(check("delta_identity_reduces_to_base", worst <= 1e-14, worst, 1e-14));
    }

    {  // |vstat - ustat| <= 1/r on a shared pool
        const auto layout = InputLayout::symmetric_matrix(5);
        const OracleKernel oracle(BaseKernel(3.0), GroupDistribution::uniform_permutation(5), 5,
                                  layout, OracleStatistic::VStat);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            Eigen::VectorXd x = random_matrix(rng, 25, 1);
            Eigen::VectorXd y = random_matrix(rng, 25, 1);
            const auto [v, u] = oracle.eval_uv(x, y, rng.next_u64());
            worst = std::max(worst, std::abs(v - u));
        }
        out.push_back(check("uv_gap_bound", worst <= 1.0 / 5 + 1e-12, worst, 1.0 / 5));
    }

    {  // spectral sampler second moment: E||w||^2 = d / sigma^2
        const BaseKernel base(2.0);
        const Eigen::MatrixXd w = base.spectral_sample(10, 100000, derive_seed(seed, 1));
        const double mean = w.rowwise().squaredNorm().mean();
        const double target = 10.0 / 4.0;
        const double rel = std::abs(mean - target) / target;
        out.push_back(check("spectral_moment", rel <= 0.02, rel, 0.02));
    }

    {  // identical seeds give bit-identical features
        const auto layout = InputLayout::symmetric_matrix(4);
        const GroupDistribution dist = GroupDistribution::uniform_permutation(4);
        const BaseKernel base(2.0);
        const Eigen::MatrixXd x = random_matrix(rng, 10, 16);
        const auto m1 = RFFeatureMap::build(base, dist, 64, 5, layout, RFVariant::RealCosine,
                                            TransferMode::DataSide, 42);
        const auto m2 = RFFeatureMap::build(base, dist, 64, 5, layout, RFVariant::RealCosine,
                                            TransferMode::DataSide, 42);
        const double diff = (m1.transform(x) - m2.transform(x)).cwiseAbs().maxCoeff();
        out.push_back(check("feature_determinism", diff == 0.0, diff, 0.0));
    }

    {  // VStat gram is positive semidefinite
        const auto layout = InputLayout::vector(8);
        const OracleKernel oracle(BaseKernel(2.0), GroupDistribution::uniform_permutation(8), 10,
                                  layout);
        const Eigen::MatrixXd x = random_matrix(rng, 30, 8);
        const Eigen::MatrixXd k = oracle.gram(x, derive_seed(seed, 2));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
        const double min_eig = eig.eigenvalues().minCoeff();
        const double bound = -1e-8 * k.trace();
        out.push_back(check("vstat_gram_psd", min_eig >= bound, min_eig, bound));
    }

    {  // Nystrom with all points as landmarks reproduces the base gram
        const BaseKernel base(2.5);
        const auto layout = InputLayout::vector(6);
        const Eigen::MatrixXd x = random_matrix(rng, 30, 6);
        const auto map = NysFeatureMap::build_explicit(base, GroupDistribution::delta_identity(),
                                                       x, 1, layout);
        const Eigen::MatrixXd f = map.transform(x);
        const double err = (f * f.transpose() - base.gram(x)).cwiseAbs().maxCoeff();
        out.push_back(check("nystrom_identity_exact", err <= 1e-6, err, 1e-6));
    }

    {  // vanilla RF approaches the closed-form Gaussian kernel
        const BaseKernel base(1.5);
        const auto layout = InputLayout::vector(5);
        const auto map = RFFeatureMap::build(base, GroupDistribution::delta_identity(), 4096, 1,
                                             layout, RFVariant::RealCosine, TransferMode::DataSide,
                                             derive_seed(seed, 3));
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const Eigen::VectorXd x = random_matrix(rng, 5, 1);
            const Eigen::VectorXd y = random_matrix(rng, 5, 1);
            worst = std::max(worst,
                             std::abs(map.transform_one(x).dot(map.transform_one(y)) -
                                      base.eval(x, y)));
        }
        out.push_back(check("rf_matches_base_kernel", worst <= 0.06, worst, 0.06));
    }

    return out;
}

}  // namespace orbitfeat
